//! Bit-serial building blocks of the inference processor.
//!
//! Grades travel one bit per cycle, most significant bit first. A comparator
//! unit sees both operands bit by bit and must commit to an output bit before
//! it has seen the rest of the word, so it keeps a small select state that is
//! cleared by the controller's word-boundary reset pulse.

use crate::fuzzy::{FuzzyError, Grade, LEVELS};

/// Bits per grade.
pub const WORD_BITS: usize = 4;

/// A 4-bit grade as it appears on a serial line, MSB first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SerialWord([bool; WORD_BITS]);

impl SerialWord {
    pub const fn from_bits(bits: [bool; WORD_BITS]) -> Self {
        SerialWord(bits)
    }

    pub const fn bits(self) -> [bool; WORD_BITS] {
        self.0
    }

    pub fn bit(self, index: usize) -> bool {
        self.0[index]
    }

    pub fn decode(self) -> Grade {
        let v = self.0.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8);
        Grade::from_nibble(v)
    }
}

impl From<Grade> for SerialWord {
    fn from(g: Grade) -> Self {
        let v = g.value();
        SerialWord([v & 8 != 0, v & 4 != 0, v & 2 != 0, v & 1 != 0])
    }
}

/// MSB-first 4-bit expansion of a raw grade value.
pub fn encode_word(value: u8) -> Result<SerialWord, FuzzyError> {
    if value >= LEVELS {
        return Err(FuzzyError::GradeOutOfRange(value as i64));
    }
    Ok(Grade::new(value)?.into())
}

/// Select memory of a serial min/max unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ComparatorState {
    #[default]
    Undecided,
    LeftSelected,
    RightSelected,
}

/// One cycle of a serial minimum unit.
///
/// `reset` must be asserted on the first (most significant) bit of each word.
/// Until the operands differ the output is `a AND b`; the first mismatch
/// selects the operand that carried the 0 for the rest of the word.
pub fn serial_min_step(
    state: ComparatorState,
    a_bit: bool,
    b_bit: bool,
    reset: bool,
) -> (ComparatorState, bool) {
    let state = if reset { ComparatorState::Undecided } else { state };
    match state {
        ComparatorState::Undecided => {
            let next = match (a_bit, b_bit) {
                (false, true) => ComparatorState::LeftSelected,
                (true, false) => ComparatorState::RightSelected,
                _ => ComparatorState::Undecided,
            };
            (next, a_bit & b_bit)
        }
        ComparatorState::LeftSelected => (state, a_bit),
        ComparatorState::RightSelected => (state, b_bit),
    }
}

/// One cycle of a serial maximum unit. Dual of [`serial_min_step`]: `a OR b`
/// while undecided, and a mismatch selects the operand that carried the 1.
pub fn serial_max_step(
    state: ComparatorState,
    a_bit: bool,
    b_bit: bool,
    reset: bool,
) -> (ComparatorState, bool) {
    let state = if reset { ComparatorState::Undecided } else { state };
    match state {
        ComparatorState::Undecided => {
            let next = match (a_bit, b_bit) {
                (true, false) => ComparatorState::LeftSelected,
                (false, true) => ComparatorState::RightSelected,
                _ => ComparatorState::Undecided,
            };
            (next, a_bit | b_bit)
        }
        ComparatorState::LeftSelected => (state, a_bit),
        ComparatorState::RightSelected => (state, b_bit),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SerialOp {
    Min,
    Max,
}

/// A serial comparator owning its select state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SerialUnit {
    op: SerialOp,
    state: ComparatorState,
}

impl SerialUnit {
    pub fn new(op: SerialOp) -> Self {
        Self {
            op,
            state: ComparatorState::Undecided,
        }
    }

    pub fn min() -> Self {
        Self::new(SerialOp::Min)
    }

    pub fn max() -> Self {
        Self::new(SerialOp::Max)
    }

    pub fn state(&self) -> ComparatorState {
        self.state
    }

    pub fn clear(&mut self) {
        self.state = ComparatorState::Undecided;
    }

    pub fn step(&mut self, a_bit: bool, b_bit: bool, reset: bool) -> bool {
        let (state, out) = match self.op {
            SerialOp::Min => serial_min_step(self.state, a_bit, b_bit, reset),
            SerialOp::Max => serial_max_step(self.state, a_bit, b_bit, reset),
        };
        self.state = state;
        out
    }

    /// Streams two whole words through the unit.
    pub fn word(&mut self, a: SerialWord, b: SerialWord) -> SerialWord {
        let mut out = [false; WORD_BITS];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.step(a.bit(i), b.bit(i), i == 0);
        }
        SerialWord(out)
    }
}

/// 4-bit circulating shift register holding a data path's match degree.
///
/// While accumulating, the bit at the head is combined with the incoming
/// serial bit through a max unit and the result is shifted back in, so after
/// each complete word the register holds the running maximum. During the
/// conclusion phase the register only recirculates, presenting its value MSB
/// first once per word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AlphaRegister {
    word: [bool; WORD_BITS],
    head: usize,
    max: ComparatorState,
}

impl AlphaRegister {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        *self = Self::default();
    }

    /// Decoded register contents. Only meaningful at word boundaries.
    pub fn value(&self) -> Grade {
        SerialWord(self.word).decode()
    }

    pub fn at_word_boundary(&self) -> bool {
        self.head == 0
    }

    /// One accumulation cycle; `word_start` is the controller's reset pulse.
    pub fn accumulate_bit(&mut self, bit: bool, word_start: bool) {
        let (state, out) = serial_max_step(self.max, self.word[self.head], bit, word_start);
        self.max = state;
        self.word[self.head] = out;
        self.head = (self.head + 1) % WORD_BITS;
    }

    /// One recirculation cycle; returns the bit shifted out.
    pub fn recirculate(&mut self) -> bool {
        let bit = self.word[self.head];
        self.head = (self.head + 1) % WORD_BITS;
        bit
    }

    /// Folds a whole word into the running maximum.
    pub fn accumulate(&mut self, word: SerialWord) {
        debug_assert!(self.at_word_boundary());
        for (i, &b) in word.0.iter().enumerate() {
            self.accumulate_bit(b, i == 0);
        }
    }
}

/// One bit on a pipelined serial line together with its control tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StreamBit {
    pub bit: bool,
    /// Comparator reset: first bit of a word.
    pub word_start: bool,
    pub valid: bool,
}

impl StreamBit {
    pub const IDLE: StreamBit = StreamBit {
        bit: false,
        word_start: false,
        valid: false,
    };
}

/// Binary tree of serial max units with a pipeline register after every level.
///
/// Leaves beyond the populated count are tied to constant 0. Latency is one
/// cycle per level, `ceil(log2(n))` in total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxTree {
    leaves: usize,
    // levels[l] holds the output registers and comparator states of level l
    regs: Vec<Vec<StreamBit>>,
    units: Vec<Vec<ComparatorState>>,
}

impl MaxTree {
    pub fn new(leaves: usize) -> Self {
        assert!(leaves >= 1, "a max tree needs at least one leaf");
        let depth = tree_depth(leaves);
        let mut regs = Vec::with_capacity(depth);
        let mut units = Vec::with_capacity(depth);
        let mut width = 1usize << depth;
        for _ in 0..depth {
            width /= 2;
            regs.push(vec![StreamBit::IDLE; width]);
            units.push(vec![ComparatorState::Undecided; width]);
        }
        Self {
            leaves,
            regs,
            units,
        }
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn depth(&self) -> usize {
        self.regs.len()
    }

    pub fn clear(&mut self) {
        for level in &mut self.regs {
            level.fill(StreamBit::IDLE);
        }
        for level in &mut self.units {
            level.fill(ComparatorState::Undecided);
        }
    }

    /// Root register contents, what the output pin shows this cycle.
    pub fn output(&self, leaves: &[StreamBit]) -> StreamBit {
        match self.regs.last() {
            Some(level) => level[0],
            None => leaves.first().copied().unwrap_or(StreamBit::IDLE),
        }
    }

    /// Advances one clock. Returns the output visible during this cycle (the
    /// root register before the clock edge).
    pub fn tick(&mut self, leaves: &[StreamBit]) -> StreamBit {
        assert!(
            leaves.len() <= self.leaves,
            "{} leaf streams for a {}-leaf tree",
            leaves.len(),
            self.leaves
        );
        let out = self.output(leaves);
        let depth = self.depth();
        if depth == 0 {
            return out;
        }

        let tags = leaves.first().copied().unwrap_or(StreamBit::IDLE);
        let vacant = StreamBit { bit: false, ..tags };
        let width0 = 1usize << depth;
        let padded: Vec<StreamBit> = (0..width0)
            .map(|i| leaves.get(i).copied().unwrap_or(vacant))
            .collect();

        // Top-down so each level reads its children's pre-edge values.
        for level in (0..depth).rev() {
            let inputs: &[StreamBit] = if level == 0 {
                &padded
            } else {
                &self.regs[level - 1]
            };
            let next: Vec<(ComparatorState, StreamBit)> = inputs
                .chunks_exact(2)
                .zip(&self.units[level])
                .map(|(pair, &state)| {
                    let (l, r) = (pair[0], pair[1]);
                    let (state, bit) = serial_max_step(state, l.bit, r.bit, l.word_start);
                    (
                        state,
                        StreamBit {
                            bit,
                            word_start: l.word_start,
                            valid: l.valid,
                        },
                    )
                })
                .collect();
            for (i, (state, bit)) in next.into_iter().enumerate() {
                self.units[level][i] = state;
                self.regs[level][i] = bit;
            }
        }
        out
    }
}

/// Number of registered levels needed for `leaves` inputs.
pub fn tree_depth(leaves: usize) -> usize {
    leaves.max(1).next_power_of_two().trailing_zeros() as usize
}

/// Result of streaming word sequences through a [`MaxTree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeRun {
    pub words: Vec<SerialWord>,
    /// Cycles between the first leaf bit entering and the first output bit.
    pub latency: usize,
}

/// Streams equal-length word sequences through a max tree, cycle by cycle,
/// and collects the root output word by word.
pub fn tree_reduce_max(leaves: &[Vec<SerialWord>]) -> TreeRun {
    assert!(!leaves.is_empty(), "tree_reduce_max needs at least one leaf");
    let words = leaves[0].len();
    assert!(
        leaves.iter().all(|l| l.len() == words),
        "leaf streams must be word-aligned"
    );
    let mut tree = MaxTree::new(leaves.len());
    let total_bits = words * WORD_BITS;
    let mut out_bits = Vec::with_capacity(total_bits);
    let mut first_valid = None;
    let mut cycle = 0usize;
    while out_bits.len() < total_bits {
        let inputs: Vec<StreamBit> = leaves
            .iter()
            .map(|l| {
                if cycle < total_bits {
                    StreamBit {
                        bit: l[cycle / WORD_BITS].bit(cycle % WORD_BITS),
                        word_start: cycle.is_multiple_of(WORD_BITS),
                        valid: true,
                    }
                } else {
                    StreamBit::IDLE
                }
            })
            .collect();
        let out = tree.tick(&inputs);
        if out.valid {
            first_valid.get_or_insert(cycle);
            out_bits.push(out.bit);
        }
        cycle += 1;
    }
    let words = out_bits
        .chunks_exact(WORD_BITS)
        .map(|c| SerialWord([c[0], c[1], c[2], c[3]]))
        .collect();
    TreeRun {
        words,
        latency: first_valid.unwrap_or(0),
    }
}
