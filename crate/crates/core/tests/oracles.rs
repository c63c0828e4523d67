//! Worked examples checked against independent brute-force oracles.
//!
//! The oracles below operate on plain `u8` slices and integer arithmetic and
//! share no code with the library paths they check.

use flips_core::bitserial::{
    encode_word, serial_max_step, serial_min_step, tree_reduce_max, AlphaRegister,
    ComparatorState, SerialWord,
};
use flips_core::chip::{build_rom, Chip, ChipConfig, Module};
use flips_core::fuzzy::{clip, height, infer, intersect, match_degree, union, FuzzyVector, Rule, RuleSet};
use flips_core::harness::{random_ruleset, random_vector, trial_rng};
use flips_core::io::{parse_ruleset, rom_dump, rom_load};
use rand::Rng;

fn v(values: &[u8]) -> FuzzyVector {
    FuzzyVector::from_values(values).unwrap()
}

/// Max over rules of min(min over antecedents of max_x min(obs, A), C[j]).
fn brute_infer(rules: &[(Vec<Vec<u8>>, Vec<u8>)], obs: &[Vec<u8>]) -> Vec<u8> {
    let e = rules[0].1.len();
    let mut out = vec![0u8; e];
    for (ants, cons) in rules {
        let mut w = 15u8;
        for (a, o) in ants.iter().zip(obs) {
            let mut alpha = 0u8;
            for x in 0..e {
                let m = if a[x] < o[x] { a[x] } else { o[x] };
                if m > alpha {
                    alpha = m;
                }
            }
            if alpha < w {
                w = alpha;
            }
        }
        for j in 0..e {
            let c = if cons[j] < w { cons[j] } else { w };
            if c > out[j] {
                out[j] = c;
            }
        }
    }
    out
}

fn raw(rules: &RuleSet) -> Vec<(Vec<Vec<u8>>, Vec<u8>)> {
    rules
        .rules()
        .iter()
        .map(|r| {
            (
                r.antecedents().iter().map(|a| a.values()).collect(),
                r.consequent().values(),
            )
        })
        .collect()
}

fn stream(kind: fn(ComparatorState, bool, bool, bool) -> (ComparatorState, bool), a: u8, b: u8) -> u8 {
    let mut state = ComparatorState::Undecided;
    let mut out = 0u8;
    for i in 0..4 {
        let (s, bit) = kind(state, (a >> (3 - i)) & 1 == 1, (b >> (3 - i)) & 1 == 1, i == 0);
        state = s;
        out = (out << 1) | bit as u8;
    }
    out
}

#[test]
fn frozen_pointwise_examples() {
    // pointwise oracles, computed by hand index by index
    assert_eq!(intersect(&v(&[4, 15, 6, 0]), &v(&[15, 8, 0, 0])).unwrap().values(), [4, 8, 0, 0]);
    assert_eq!(union(&v(&[0, 5, 8, 8]), &v(&[8, 8, 5, 0])).unwrap().values(), [8, 8, 8, 8]);
    assert_eq!(height(&v(&[4, 8, 0, 0])).value(), 8);
    assert_eq!(match_degree(&v(&[4, 15, 6, 0]), &v(&[15, 8, 0, 0])).unwrap().value(), 8);
    assert_eq!(clip(&v(&[0, 5, 10, 15]), flips_core::Grade::new(8).unwrap()).values(), [0, 5, 8, 8]);
}

#[test]
fn two_rule_example_against_brute_force() {
    let raw_rules = vec![
        (vec![vec![15, 8, 0, 0]], vec![0, 5, 10, 15]),
        (vec![vec![0, 8, 15, 4]], vec![15, 10, 5, 0]),
    ];
    let obs = vec![vec![4, 15, 6, 0]];
    let expected = brute_infer(&raw_rules, &obs);
    assert_eq!(expected, [8, 8, 8, 8]);

    let rules = parse_ruleset(include_str!("fixtures/two_rule.frs")).unwrap();
    assert_eq!(infer(&rules, &[v(&obs[0])]).unwrap().values(), expected);
    let mut chip = Chip::with_rules(&rules, ChipConfig::new(4, 16).unwrap()).unwrap();
    assert_eq!(chip.run_inference(&v(&obs[0])).unwrap().result.values(), expected);
}

#[test]
fn golden_matches_brute_force_on_random_sets() {
    let mut rng = trial_rng(2024, 0);
    for _ in 0..2_000 {
        let e = rng.gen_range(2..=12);
        let k = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=6);
        let rules = random_ruleset(&mut rng, n, e, k);
        let obs: Vec<FuzzyVector> = (0..k).map(|_| random_vector(&mut rng, e)).collect();
        let raw_obs: Vec<Vec<u8>> = obs.iter().map(|o| o.values()).collect();
        assert_eq!(infer(&rules, &obs).unwrap().values(), brute_infer(&raw(&rules), &raw_obs));
    }
}

#[test]
fn serial_units_exhaustive() {
    for a in 0..16u8 {
        for b in 0..16u8 {
            assert_eq!(stream(serial_min_step, a, b), a.min(b), "min({a},{b})");
            assert_eq!(stream(serial_max_step, a, b), a.max(b), "max({a},{b})");
        }
    }
    assert_eq!(stream(serial_min_step, 10, 9), 9);
    assert_eq!(stream(serial_max_step, 10, 9), 10);
}

#[test]
fn alpha_register_running_max() {
    let mut rng = trial_rng(5, 0);
    for _ in 0..500 {
        let words: Vec<u8> = (0..rng.gen_range(1..40)).map(|_| rng.gen_range(0..16)).collect();
        let mut reg = AlphaRegister::new();
        let mut oracle = 0u8;
        for &w in &words {
            reg.accumulate(encode_word(w).unwrap());
            if w > oracle {
                oracle = w;
            }
            assert_eq!(reg.value().value(), oracle);
        }
    }
}

#[test]
fn max_tree_against_linear_scan() {
    let mut rng = trial_rng(6, 0);
    for n in 1..=16usize {
        for _ in 0..50 {
            let words = rng.gen_range(1..6);
            let leaves: Vec<Vec<u8>> = (0..n)
                .map(|_| (0..words).map(|_| rng.gen_range(0..16)).collect())
                .collect();
            let streams: Vec<Vec<SerialWord>> = leaves
                .iter()
                .map(|l| l.iter().map(|&x| encode_word(x).unwrap()).collect())
                .collect();
            let run = tree_reduce_max(&streams);
            let expected_latency = (n as f64).log2().ceil() as usize;
            assert_eq!(run.latency, expected_latency, "n={n}");
            for w in 0..words {
                let mut m = 0u8;
                for l in &leaves {
                    if l[w] > m {
                        m = l[w];
                    }
                }
                assert_eq!(run.words[w].decode().value(), m);
            }
        }
    }
}

#[test]
fn published_fixture_pair() {
    let rules = parse_ruleset(include_str!("fixtures/published_format.frs")).unwrap();
    let bytes = include_bytes!("fixtures/published_format.from");
    let built = build_rom(&rules, ChipConfig::default()).unwrap();
    assert_eq!(built, rom_load(bytes).unwrap());
    assert_eq!(rom_dump(&built).unwrap(), bytes.to_vec());

    let leading: String = built.module(Module::Antecedent)[..12]
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect();
    assert_eq!(leading, "001001001111");
    assert_eq!(bytes[9], 0x24);
    assert_eq!(bytes[10] >> 4, 0xf);
    assert_eq!(built.bits_per_rule(), 124);
}

#[test]
fn chip_matches_golden_across_configurations() {
    let mut rng = trial_rng(99, 0);
    for &(e, cap) in &[(2, 2), (3, 4), (5, 8), (31, 16), (32, 32), (64, 64), (7, 64)] {
        let config = ChipConfig::new(e, cap).unwrap();
        for _ in 0..20 {
            let n = rng.gen_range(1..=cap);
            let rules = random_ruleset(&mut rng, n, e, 1);
            let obs = random_vector(&mut rng, e);
            let mut chip = Chip::with_rules(&rules, config).unwrap();
            let run = chip.run_inference(&obs).unwrap();
            assert_eq!(run.result, infer(&rules, &[obs]).unwrap());
            assert_eq!(run.cycles, config.schedule().last_cycle);
        }
    }
}

#[test]
fn alpha_snapshots_track_golden_match_degree() {
    let mut rng = trial_rng(3, 0);
    let rules = random_ruleset(&mut rng, 16, 31, 1);
    let obs = random_vector(&mut rng, 31);
    let mut chip = Chip::with_rules(&rules, ChipConfig::default()).unwrap();
    let (_, trace) = chip.run_traced(&obs).unwrap();
    let row = &trace[(2 + 4 * 31) - 1];
    assert_eq!(row.cycle, 126);
    for (i, r) in rules.rules().iter().enumerate() {
        assert_eq!(row.alphas[i], match_degree(&obs, &r.antecedents()[0]).unwrap());
    }
    let single = RuleSet::new(vec![Rule::simple(obs.clone(), obs.clone()).unwrap()]).unwrap();
    let run = Chip::with_rules(&single, ChipConfig::default())
        .unwrap()
        .run_inference(&obs)
        .unwrap();
    assert_eq!(run.result, clip(&obs, height(&obs)));
}
