//! Finite groups given by an explicit Cayley table.
//!
//! Elements are dense indices `0..order`. Built-in constructors always put the
//! identity at index 0; tables loaded from a file keep the user's numbering.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Largest `n` accepted by `symmetric:n`.
pub const MAX_SYMMETRIC_DEGREE: usize = 5;

/// An element of a [`FiniteGroup`], as a row/column index of its table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ElementIndex(pub u32);

impl ElementIndex {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for ElementIndex {
    fn from(i: usize) -> Self {
        ElementIndex(i as u32)
    }
}

impl fmt::Display for ElementIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("malformed group spec `{0}`")]
    MalformedSpec(String),
    #[error("unsupported parameter in `{spec}`: {reason}")]
    UnsupportedParameter { spec: String, reason: String },
    #[error("cannot read table file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("table line {line}: {message}")]
    TableParse { line: usize, message: String },
    #[error("closure violated: table[{row}][{col}] = {value} is not below the order {order}")]
    OutOfRange {
        row: usize,
        col: usize,
        value: usize,
        order: usize,
    },
    #[error("Latin square violated: element {value} repeats in row {row} (columns {first} and {second})")]
    RowRepeat {
        row: usize,
        value: usize,
        first: usize,
        second: usize,
    },
    #[error("Latin square violated: element {value} repeats in column {col} (rows {first} and {second})")]
    ColumnRepeat {
        col: usize,
        value: usize,
        first: usize,
        second: usize,
    },
    #[error("identity axiom violated: no element e with e*x = x*e = x for all x")]
    NoIdentity,
    #[error("inverse axiom violated: element {element} has no two-sided inverse")]
    NoInverse { element: usize },
    #[error("associativity violated for ({a}, {b}, {c}): ({a}*{b})*{c} = {left} but {a}*({b}*{c}) = {right}")]
    NotAssociative {
        a: usize,
        b: usize,
        c: usize,
        left: usize,
        right: usize,
    },
    #[error("group must have at least one element")]
    Empty,
}

/// A finite group stored as its full multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    /// Row-major, `table[i * order + j] = i * j`.
    table: Vec<u32>,
    identity: ElementIndex,
    inverse: Vec<u32>,
    name: String,
    labels: Vec<String>,
}

impl FiniteGroup {
    /// Builds and validates a group from table rows. The identity is detected,
    /// never renumbered.
    pub fn from_rows(name: impl Into<String>, rows: &[Vec<usize>]) -> Result<Self, GroupError> {
        let order = rows.len();
        if order == 0 {
            return Err(GroupError::Empty);
        }
        let mut table = Vec::with_capacity(order * order);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != order {
                return Err(GroupError::TableParse {
                    line: i + 2,
                    message: format!("row {i} has {} entries, expected {order}", row.len()),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= order {
                    return Err(GroupError::OutOfRange {
                        row: i,
                        col: j,
                        value: v,
                        order,
                    });
                }
                table.push(v as u32);
            }
        }
        let labels = (0..order).map(|i| i.to_string()).collect();
        Self::from_table(name.into(), order, table, labels)
    }

    fn from_table(
        name: String,
        order: usize,
        table: Vec<u32>,
        labels: Vec<String>,
    ) -> Result<Self, GroupError> {
        check_latin(order, &table)?;
        let at = |i: usize, j: usize| table[i * order + j] as usize;
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| at(e, x) == x && at(x, e) == x))
            .ok_or(GroupError::NoIdentity)?;
        let mut inverse = Vec::with_capacity(order);
        for a in 0..order {
            let b = (0..order)
                .find(|&b| at(a, b) == identity && at(b, a) == identity)
                .ok_or(GroupError::NoInverse { element: a })?;
            inverse.push(b as u32);
        }
        for a in 0..order {
            for b in 0..order {
                let ab = at(a, b);
                for c in 0..order {
                    let left = at(ab, c);
                    let right = at(a, at(b, c));
                    if left != right {
                        return Err(GroupError::NotAssociative {
                            a,
                            b,
                            c,
                            left,
                            right,
                        });
                    }
                }
            }
        }
        Ok(FiniteGroup {
            order,
            table,
            identity: ElementIndex(identity as u32),
            inverse,
            name,
            labels,
        })
    }

    /// Builds a group from a multiplication closure over `0..order`.
    fn from_fn(
        name: String,
        order: usize,
        labels: Vec<String>,
        mul: impl Fn(usize, usize) -> usize,
    ) -> Result<Self, GroupError> {
        let mut table = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                table.push(mul(i, j) as u32);
            }
        }
        Self::from_table(name, order, table, labels)?.normalized()
    }

    /// Moves the identity to index 0 by swapping it with the current element 0.
    fn normalized(self) -> Result<Self, GroupError> {
        let e = self.identity.index();
        if e == 0 {
            return Ok(self);
        }
        let n = self.order;
        let swap = |x: usize| {
            if x == e {
                0
            } else if x == 0 {
                e
            } else {
                x
            }
        };
        let mut table = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                table[swap(i) * n + swap(j)] = swap(self.table[i * n + j] as usize) as u32;
            }
        }
        let mut labels = self.labels.clone();
        labels.swap(0, e);
        Self::from_table(self.name, n, table, labels)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> ElementIndex {
        self.identity
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementIndex> + '_ {
        (0..self.order as u32).map(ElementIndex)
    }

    #[inline]
    pub fn mul(&self, a: ElementIndex, b: ElementIndex) -> ElementIndex {
        ElementIndex(self.table[a.index() * self.order + b.index()])
    }

    #[inline]
    pub fn inv(&self, a: ElementIndex) -> ElementIndex {
        ElementIndex(self.inverse[a.index()])
    }

    /// Left-to-right product of a sequence; the empty product is the identity.
    pub fn product<I: IntoIterator<Item = ElementIndex>>(&self, items: I) -> ElementIndex {
        items
            .into_iter()
            .fold(self.identity, |acc, x| self.mul(acc, x))
    }

    /// `x⁻¹ · a · x`.
    pub fn conjugate(&self, a: ElementIndex, x: ElementIndex) -> ElementIndex {
        self.mul(self.mul(self.inv(x), a), x)
    }

    /// All `a` with `a·a = 1`, in index order. Always contains the identity.
    pub fn involutions(&self) -> Vec<ElementIndex> {
        self.elements()
            .filter(|&a| self.mul(a, a) == self.identity)
            .collect()
    }

    pub fn is_involution(&self, a: ElementIndex) -> bool {
        self.mul(a, a) == self.identity
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order;
        (0..n).all(|i| (i + 1..n).all(|j| self.table[i * n + j] == self.table[j * n + i]))
    }

    /// Human-readable name of an element (residue, one-line permutation, ...).
    pub fn element_name(&self, a: ElementIndex) -> &str {
        &self.labels[a.index()]
    }

    pub fn element_by_name(&self, name: &str) -> Option<ElementIndex> {
        self.labels
            .iter()
            .position(|l| l == name)
            .map(|i| ElementIndex(i as u32))
    }

    /// Re-runs every axiom check exhaustively.
    pub fn verify_axioms(&self) -> Result<(), GroupError> {
        Self::from_table(
            self.name.clone(),
            self.order,
            self.table.clone(),
            self.labels.clone(),
        )
        .map(|_| ())
    }

    /// Table rows as plain indices.
    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.table
            .chunks(self.order)
            .map(|r| r.iter().map(|&x| x as usize).collect())
            .collect()
    }
}

fn check_latin(order: usize, table: &[u32]) -> Result<(), GroupError> {
    let mut seen = vec![usize::MAX; order];
    for i in 0..order {
        seen.iter_mut().for_each(|s| *s = usize::MAX);
        for j in 0..order {
            let v = table[i * order + j] as usize;
            if v >= order {
                return Err(GroupError::OutOfRange {
                    row: i,
                    col: j,
                    value: v,
                    order,
                });
            }
            if seen[v] != usize::MAX {
                return Err(GroupError::RowRepeat {
                    row: i,
                    value: v,
                    first: seen[v],
                    second: j,
                });
            }
            seen[v] = j;
        }
    }
    for j in 0..order {
        seen.iter_mut().for_each(|s| *s = usize::MAX);
        for i in 0..order {
            let v = table[i * order + j] as usize;
            if seen[v] != usize::MAX {
                return Err(GroupError::ColumnRepeat {
                    col: j,
                    value: v,
                    first: seen[v],
                    second: i,
                });
            }
            seen[v] = i;
        }
    }
    Ok(())
}

/// Parses a group spec such as `cyclic:5`, `symmetric:3` or
/// `product:cyclic:2,dihedral:4`.
pub fn make_group(spec: &str) -> Result<FiniteGroup, GroupError> {
    let spec = spec.trim();
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| GroupError::MalformedSpec(spec.to_string()))?;
    match kind {
        "cyclic" => {
            let n = parse_param(spec, arg)?;
            if n < 1 {
                return Err(unsupported(spec, "cyclic:n needs n >= 1"));
            }
            cyclic(n)
        }
        "dihedral" => {
            let n = parse_param(spec, arg)?;
            if n < 3 {
                return Err(unsupported(spec, "dihedral:n needs n >= 3"));
            }
            dihedral(n)
        }
        "symmetric" => {
            let n = parse_param(spec, arg)?;
            if !(1..=MAX_SYMMETRIC_DEGREE).contains(&n) {
                return Err(unsupported(spec, "symmetric:n needs 1 <= n <= 5"));
            }
            symmetric(n)
        }
        "quaternion" => {
            if parse_param(spec, arg)? != 8 {
                return Err(unsupported(spec, "only quaternion:8 is supported"));
            }
            quaternion()
        }
        "product" => {
            // Split at the first comma for which both halves parse.
            for (pos, _) in arg.match_indices(',') {
                let (l, r) = (&arg[..pos], &arg[pos + 1..]);
                if let (Ok(a), Ok(b)) = (make_group(l), make_group(r)) {
                    return direct_product(&a, &b, spec);
                }
            }
            Err(GroupError::MalformedSpec(spec.to_string()))
        }
        "table" => load_table_file(Path::new(arg), spec),
        _ => Err(GroupError::MalformedSpec(spec.to_string())),
    }
}

fn parse_param(spec: &str, arg: &str) -> Result<usize, GroupError> {
    arg.trim()
        .parse()
        .map_err(|_| GroupError::MalformedSpec(spec.to_string()))
}

fn unsupported(spec: &str, reason: &str) -> GroupError {
    GroupError::UnsupportedParameter {
        spec: spec.to_string(),
        reason: reason.to_string(),
    }
}

pub fn cyclic(n: usize) -> Result<FiniteGroup, GroupError> {
    let labels = (0..n).map(|i| i.to_string()).collect();
    FiniteGroup::from_fn(format!("cyclic:{n}"), n, labels, |i, j| (i + j) % n)
}

/// Dihedral group of order `2n`. Index `k` is the rotation `r^k`, index
/// `n + k` is the reflection `s r^k`.
pub fn dihedral(n: usize) -> Result<FiniteGroup, GroupError> {
    let labels = (0..n)
        .map(|k| format!("r{k}"))
        .chain((0..n).map(|k| format!("sr{k}")))
        .collect();
    FiniteGroup::from_fn(format!("dihedral:{n}"), 2 * n, labels, |a, b| {
        let (fa, ka) = (a / n, a % n);
        let (fb, kb) = (b / n, b % n);
        // s^fa r^ka s^fb r^kb, using r^k s = s r^-k
        let (f, k) = if fb == 0 {
            (fa, (ka + kb) % n)
        } else {
            ((fa + 1) % 2, (n - ka + kb) % n)
        };
        f * n + k
    })
}

/// Symmetric group on `n` points. Elements are permutations in lexicographic
/// order of their one-line notation, named by that notation (1-based digits,
/// so `213` swaps the first two points). The product `a·b` is the composition
/// `i ↦ a(b(i))`.
pub fn symmetric(n: usize) -> Result<FiniteGroup, GroupError> {
    let perms = permutations(n);
    let lookup: HashMap<&[u8], usize> = perms
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_slice(), i))
        .collect();
    let labels = perms
        .iter()
        .map(|p| p.iter().map(|&x| char::from(b'1' + x)).collect())
        .collect();
    FiniteGroup::from_fn(format!("symmetric:{n}"), perms.len(), labels, |a, b| {
        let (pa, pb) = (&perms[a], &perms[b]);
        let composed: Vec<u8> = pb.iter().map(|&x| pa[x as usize]).collect();
        lookup[composed.as_slice()]
    })
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut current: Vec<u8> = (0..n as u8).collect();
    let mut out = vec![current.clone()];
    // next_permutation
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
    out
}

/// Quaternion group `{±1, ±i, ±j, ±k}`, indexed `1, -1, i, -i, j, -j, k, -k`.
pub fn quaternion() -> Result<FiniteGroup, GroupError> {
    // unit products: (sign, unit) for units 1, i, j, k
    const UNIT: [[(bool, usize); 4]; 4] = [
        [(false, 0), (false, 1), (false, 2), (false, 3)],
        [(false, 1), (true, 0), (false, 3), (true, 2)],
        [(false, 2), (true, 3), (true, 0), (false, 1)],
        [(false, 3), (false, 2), (true, 1), (true, 0)],
    ];
    let labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    FiniteGroup::from_fn("quaternion:8".to_string(), 8, labels, |a, b| {
        let (ua, na) = (a / 2, a % 2 == 1);
        let (ub, nb) = (b / 2, b % 2 == 1);
        let (neg, u) = UNIT[ua][ub];
        2 * u + usize::from(neg ^ na ^ nb)
    })
}

/// Direct product; element `(x, y)` has index `x * |right| + y`.
pub fn direct_product(
    left: &FiniteGroup,
    right: &FiniteGroup,
    name: &str,
) -> Result<FiniteGroup, GroupError> {
    let m = right.order();
    let order = left.order() * m;
    let labels = (0..order)
        .map(|i| format!("({},{})", left.labels[i / m], right.labels[i % m]))
        .collect();
    FiniteGroup::from_fn(name.to_string(), order, labels, |a, b| {
        let x = left.mul(ElementIndex::from(a / m), ElementIndex::from(b / m));
        let y = right.mul(ElementIndex::from(a % m), ElementIndex::from(b % m));
        x.index() * m + y.index()
    })
}

/// Parses the Cayley-table text format: the order on the first line, then
/// one row per line. `#` starts a comment.
pub fn parse_table(text: &str, name: &str) -> Result<FiniteGroup, GroupError> {
    let mut order: Option<usize> = None;
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let numbers: Result<Vec<usize>, _> = content
            .split_whitespace()
            .map(str::parse::<usize>)
            .collect();
        let numbers = numbers.map_err(|e| GroupError::TableParse {
            line,
            message: format!("expected non-negative integers: {e}"),
        })?;
        match order {
            None => {
                if numbers.len() != 1 {
                    return Err(GroupError::TableParse {
                        line,
                        message: "first line must hold only the group order".into(),
                    });
                }
                if numbers[0] == 0 {
                    return Err(GroupError::Empty);
                }
                order = Some(numbers[0]);
            }
            Some(n) => {
                if rows.len() == n {
                    return Err(GroupError::TableParse {
                        line,
                        message: format!("more than {n} table rows"),
                    });
                }
                if numbers.len() != n {
                    return Err(GroupError::TableParse {
                        line,
                        message: format!("row has {} entries, expected {n}", numbers.len()),
                    });
                }
                rows.push(numbers);
            }
        }
    }
    let n = order.ok_or(GroupError::TableParse {
        line: 1,
        message: "missing group order".into(),
    })?;
    if rows.len() != n {
        return Err(GroupError::TableParse {
            line: text.lines().count(),
            message: format!("expected {n} table rows, found {}", rows.len()),
        });
    }
    FiniteGroup::from_rows(name, &rows)
}

fn load_table_file(path: &Path, name: &str) -> Result<FiniteGroup, GroupError> {
    let text = std::fs::read_to_string(path).map_err(|source| GroupError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_table(&text, name)
}

/// Renders a group in the Cayley-table text format.
pub fn write_table(g: &FiniteGroup) -> String {
    let mut out = format!("{}\n", g.order());
    for row in g.rows() {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
