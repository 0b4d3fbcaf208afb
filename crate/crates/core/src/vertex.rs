use alloc::vec::Vec;
use core::fmt;

/// Identifier of a vertex (or tree node).
///
/// Finite graphs use [`VertexId::Int`]. Lazy families use structured tokens:
/// grid and ladder coordinates, reduced words for regular and semiregular
/// trees, and for amalgam graphs the canonical key of a contracted class,
/// i.e. the least `(tree node, local vertex)` pair in the class.
///
/// The derived ordering is the canonical ordering used everywhere.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexId {
    Int(i64),
    Pair(i64, i64),
    Word(Vec<u32>),
    Class { node: Vec<u32>, local: u32 },
}

impl VertexId {
    pub fn int(&self) -> Option<i64> {
        match self {
            VertexId::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn word(&self) -> Option<&[u32]> {
        match self {
            VertexId::Word(w) => Some(w),
            _ => None,
        }
    }
}

impl From<i64> for VertexId {
    fn from(i: i64) -> Self {
        VertexId::Int(i)
    }
}

fn write_word(f: &mut fmt::Formatter<'_>, w: &[u32]) -> fmt::Result {
    if w.is_empty() {
        return f.write_str("e");
    }
    for (i, l) in w.iter().enumerate() {
        if i > 0 {
            f.write_str(".")?;
        }
        write!(f, "{l}")?;
    }
    Ok(())
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Int(i) => write!(f, "{i}"),
            VertexId::Pair(x, y) => write!(f, "({x},{y})"),
            VertexId::Word(w) => {
                f.write_str("w")?;
                write_word(f, w)
            }
            VertexId::Class { node, local } => {
                f.write_str("[")?;
                write_word(f, node)?;
                write!(f, "]{local}")
            }
        }
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
