use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Neg,
    Pos,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Pos => Sign::Neg,
        }
    }

    pub fn times(self, s: i8) -> Sign {
        if s < 0 {
            self.flip()
        } else {
            self
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Neg => -1,
            Sign::Pos => 1,
        }
    }

    pub fn from_bool(positive: bool) -> Sign {
        if positive {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

/// Parity extension of an edge color: odd lines carry the 0-medians, even
/// lines point at the odd crossing line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParityMark {
    Odd,
    Even(Sign),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    /// Bracket bit only: the image of the projection to the central tiling.
    Bracket,
    /// Bracket, boldness and pointer: eight colors.
    Base,
    /// Base colors plus the parity mark.
    Parity,
}

impl Alphabet {
    pub fn name(self) -> &'static str {
        match self {
            Alphabet::Bracket => "bracket",
            Alphabet::Base => "base",
            Alphabet::Parity => "parity",
        }
    }

    /// Hex digits per color in text formats.
    pub fn digits(self) -> usize {
        match self {
            Alphabet::Parity => 2,
            _ => 1,
        }
    }

    /// Every code of the alphabet, ascending.
    pub fn codes(self) -> Vec<u8> {
        match self {
            Alphabet::Bracket => vec![0, 1],
            Alphabet::Base => (0..8).collect(),
            Alphabet::Parity => (8..32).collect(),
        }
    }

    pub fn admits(self, c: EdgeColor) -> bool {
        match self {
            Alphabet::Bracket => c.0 < 2,
            Alphabet::Base => c.0 < 8,
            Alphabet::Parity => (8..32).contains(&c.0),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Alphabet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bracket" => Ok(Alphabet::Bracket),
            "base" => Ok(Alphabet::Base),
            "parity" => Ok(Alphabet::Parity),
            other => Err(format!("unknown alphabet {other:?}")),
        }
    }
}

/// An edge color packed into its file code: bit 0 bracket, bit 1 bold,
/// bit 2 pointer (1 = toward increasing coordinate). Bits 3-4 hold the
/// parity mark: 0 none, 1 odd, 2 even pointing down, 3 even pointing up.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeColor(u8);

impl EdgeColor {
    pub fn new(bracket: u8, bold: bool, pointer: Sign) -> Self {
        EdgeColor((bracket & 1) | (bold as u8) << 1 | ((pointer == Sign::Pos) as u8) << 2)
    }

    pub fn bracket_only(bracket: u8) -> Self {
        EdgeColor(bracket & 1)
    }

    pub fn from_code(code: u8) -> Option<Self> {
        (code < 32).then_some(EdgeColor(code))
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn bracket(self) -> u8 {
        self.0 & 1
    }

    pub fn bold(self) -> bool {
        self.0 & 2 != 0
    }

    pub fn pointer(self) -> Sign {
        Sign::from_bool(self.0 & 4 != 0)
    }

    pub fn parity(self) -> Option<ParityMark> {
        match self.0 >> 3 {
            0 => None,
            1 => Some(ParityMark::Odd),
            2 => Some(ParityMark::Even(Sign::Neg)),
            _ => Some(ParityMark::Even(Sign::Pos)),
        }
    }

    pub fn with_parity(self, mark: Option<ParityMark>) -> Self {
        let state = match mark {
            None => 0,
            Some(ParityMark::Odd) => 1,
            Some(ParityMark::Even(Sign::Neg)) => 2,
            Some(ParityMark::Even(Sign::Pos)) => 3,
        };
        EdgeColor(self.base().0 | state << 3)
    }

    /// Bracket, boldness and pointer, without the parity mark.
    pub fn base(self) -> Self {
        EdgeColor(self.0 & 7)
    }

    pub fn with_bracket(self, bracket: u8) -> Self {
        EdgeColor((self.0 & !1) | (bracket & 1))
    }

    pub fn with_pointer(self, pointer: Sign) -> Self {
        EdgeColor((self.0 & !4) | ((pointer == Sign::Pos) as u8) << 2)
    }

    /// Reflection action on the color: `line_sign` negates the coordinate the
    /// bracket describes, `dir_sign` negates the direction the edge runs in.
    pub fn transformed(self, line_sign: i8, dir_sign: i8) -> Self {
        let mut c = self;
        if line_sign < 0 {
            c = c.with_bracket(c.bracket() ^ 1);
        }
        if dir_sign < 0 {
            c = c.with_pointer(c.pointer().flip());
            if let Some(ParityMark::Even(s)) = c.parity() {
                c = c.with_parity(Some(ParityMark::Even(s.flip())));
            }
        }
        c
    }
}

impl fmt::Debug for EdgeColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.pointer() == Sign::Pos {
            '+'
        } else {
            '-'
        };
        write!(
            f,
            "c{}{}{}",
            self.bracket(),
            if self.bold() { 'B' } else { 'p' },
            p
        )?;
        match self.parity() {
            None => Ok(()),
            Some(ParityMark::Odd) => f.write_str("/o"),
            Some(ParityMark::Even(s)) => write!(f, "/e{}", if s == Sign::Pos { '+' } else { '-' }),
        }
    }
}
