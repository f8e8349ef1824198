use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// Interned-by-value identifier for coordinates, constants and function names.
///
/// Ordering is "natural": a trailing run of digits compares numerically, so
/// `x2 < x10` and coordinate lists print in the order people expect.
#[derive(Clone)]
pub struct Sym(Arc<Inner>);

struct Inner {
    name: Box<str>,
    head: usize,
    num: Option<u64>,
}

impl Sym {
    pub fn new(name: &str) -> Self {
        let digits = name.bytes().rev().take_while(|b| b.is_ascii_digit()).count();
        let (head, num) = if digits == 0 || digits > 18 {
            (name.len(), None)
        } else {
            let head = name.len() - digits;
            (head, name[head..].parse().ok())
        };
        Sym(Arc::new(Inner { name: name.into(), head, num }))
    }

    pub fn as_str(&self) -> &str {
        &self.0.name
    }
}

impl PartialEq for Sym {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.name == other.0.name
    }
}

impl Eq for Sym {}

impl std::hash::Hash for Sym {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.0.name.hash(h);
    }
}

impl Ord for Sym {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let (a, b) = (&*self.0, &*other.0);
        a.name[..a.head]
            .cmp(&b.name[..b.head])
            .then_with(|| a.num.cmp(&b.num))
            .then_with(|| a.name.cmp(&b.name))
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}
