use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Incidence value of an incomplete context.
///
/// Two orders exist on the three values. The information order puts
/// `Unknown` below both `Cross` and `Blank`, which are incomparable; the
/// trueness order is the chain `Blank < Unknown < Cross`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Cross,
    Blank,
    Unknown,
}

impl Cell {
    pub const ALL: [Cell; 3] = [Cell::Cross, Cell::Blank, Cell::Unknown];

    pub fn is_known(self) -> bool {
        self != Cell::Unknown
    }

    /// `self ≤ other` in the information order.
    pub fn info_leq(self, other: Cell) -> bool {
        self == Cell::Unknown || self == other
    }

    /// Infimum in the information order.
    pub fn meet(self, other: Cell) -> Cell {
        if self == other {
            self
        } else {
            Cell::Unknown
        }
    }

    /// Supremum in the information order, `None` when one side is a cross
    /// and the other a blank.
    pub fn join(self, other: Cell) -> Option<Cell> {
        match (self, other) {
            (Cell::Unknown, x) | (x, Cell::Unknown) => Some(x),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn conflicts_with(self, other: Cell) -> bool {
        self.join(other).is_none()
    }

    fn trueness_rank(self) -> u8 {
        match self {
            Cell::Blank => 0,
            Cell::Unknown => 1,
            Cell::Cross => 2,
        }
    }

    /// Comparison in the (total) trueness order.
    pub fn trueness_cmp(self, other: Cell) -> Ordering {
        self.trueness_rank().cmp(&other.trueness_rank())
    }

    pub fn to_char(self) -> char {
        match self {
            Cell::Cross => 'X',
            Cell::Blank => '.',
            Cell::Unknown => '?',
        }
    }

    pub fn from_char(c: char) -> Option<Cell> {
        match c {
            'X' | 'x' => Some(Cell::Cross),
            '.' => Some(Cell::Blank),
            '?' => Some(Cell::Unknown),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}
