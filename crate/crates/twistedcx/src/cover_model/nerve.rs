use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub const MAX_OPENS: usize = 32;

/// A set of open indices, as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Face(pub u32);

impl fmt::Debug for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.indices().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl Face {
    pub const EMPTY: Face = Face(0);

    pub fn singleton(i: usize) -> Face {
        Face(1 << i)
    }

    /// Underlying set of a tuple; repeats collapse.
    pub fn of(indices: &[usize]) -> Face {
        Face(indices.iter().fold(0, |acc, &i| acc | (1 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn union(self, o: Face) -> Face {
        Face(self.0 | o.0)
    }

    pub fn with(self, i: usize) -> Face {
        Face(self.0 | (1 << i))
    }

    pub fn is_subset(self, o: Face) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn indices(self) -> Vec<usize> {
        (0..MAX_OPENS).filter(|&i| self.contains(i)).collect()
    }

    pub fn min_index(self) -> Option<usize> {
        (!self.is_empty()).then(|| self.0.trailing_zeros() as usize)
    }
}

/// Ordering used for listings: by size, then by bits.
pub fn face_order(a: &Face, b: &Face) -> std::cmp::Ordering {
    (a.len(), a.0).cmp(&(b.len(), b.0))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("the index set is empty")]
    EmptyIndexSet,
    #[error("at most {MAX_OPENS} opens are supported")]
    TooManyOpens,
    #[error("duplicate open label {0:?}")]
    DuplicateLabel(String),
    #[error("face refers to index {0} outside the index set")]
    IndexOutOfRange(usize),
    #[error("declared face is empty")]
    EmptyFace,
    #[error("{0:?} is not a face")]
    NotAFace(Face),
}

/// The nerve of a finite cover: opens plus the subset-closed family of faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverNerve {
    labels: Vec<String>,
    faces: Vec<Face>,
    set: BTreeSet<Face>,
}

/// Subset closure of the declared faces plus all singletons. The flag reports
/// whether closure added faces beyond the declared ones and the singletons.
pub fn build_nerve(labels: &[String], declared: &[Vec<usize>]) -> Result<(CoverNerve, bool), CoverError> {
    if labels.is_empty() {
        return Err(CoverError::EmptyIndexSet);
    }
    if labels.len() > MAX_OPENS {
        return Err(CoverError::TooManyOpens);
    }
    for (k, l) in labels.iter().enumerate() {
        if labels[..k].contains(l) {
            return Err(CoverError::DuplicateLabel(l.clone()));
        }
    }
    let mut set = BTreeSet::new();
    for i in 0..labels.len() {
        set.insert(Face::singleton(i));
    }
    let mut given = set.clone();
    for f in declared {
        if f.is_empty() {
            return Err(CoverError::EmptyFace);
        }
        if let Some(&i) = f.iter().find(|&&i| i >= labels.len()) {
            return Err(CoverError::IndexOutOfRange(i));
        }
        let face = Face::of(f);
        given.insert(face);
        // every nonempty submask
        let mut sub = face.0;
        while sub != 0 {
            set.insert(Face(sub));
            sub = (sub - 1) & face.0;
        }
    }
    let added = set.len() != given.len();
    let mut faces: Vec<Face> = set.iter().copied().collect();
    faces.sort_by(face_order);
    Ok((
        CoverNerve {
            labels: labels.to_vec(),
            faces,
            set,
        },
        added,
    ))
}

impl CoverNerve {
    /// Convenience constructor with labels `0..n`.
    pub fn with_faces(n: usize, declared: &[&[usize]]) -> CoverNerve {
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let decl: Vec<Vec<usize>> = declared.iter().map(|f| f.to_vec()).collect();
        build_nerve(&labels, &decl).expect("valid nerve").0
    }

    /// Full simplex on n opens.
    pub fn simplex(n: usize) -> CoverNerve {
        let all: Vec<usize> = (0..n).collect();
        CoverNerve::with_faces(n, &[&all])
    }

    /// Three opens, pairwise overlaps, empty triple overlap.
    pub fn circle() -> CoverNerve {
        CoverNerve::with_faces(3, &[&[0, 1], &[1, 2], &[0, 2]])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// All faces, smallest first.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn is_face(&self, f: Face) -> bool {
        self.set.contains(&f)
    }

    pub fn is_face_tuple(&self, t: &[usize]) -> bool {
        !t.is_empty() && self.is_face(Face::of(t))
    }

    /// Faces containing `f` (for `f` empty: all faces).
    pub fn star(&self, f: Face) -> Vec<Face> {
        self.faces.iter().copied().filter(|g| f.is_subset(*g)).collect()
    }

    pub fn face_name(&self, f: Face) -> String {
        f.indices()
            .iter()
            .map(|&i| self.labels[i].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn tuple_name(&self, t: &[usize]) -> String {
        let parts: Vec<&str> = t.iter().map(|&i| self.labels[i].as_str()).collect();
        format!("({})", parts.join(","))
    }

    /// Tuples of the given length whose set together with `base` is a face,
    /// in lexicographic order.
    pub fn tuples(&self, len: usize, base: Face) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(len);
        self.extend_tuples(len, base, &mut cur, &mut out);
        out
    }

    fn extend_tuples(&self, len: usize, acc: Face, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in 0..self.len() {
            let f = acc.with(i);
            if self.is_face(f) {
                cur.push(i);
                self.extend_tuples(len, f, cur, out);
                cur.pop();
            }
        }
    }

    /// Largest face size.
    pub fn dimension(&self) -> usize {
        self.faces.iter().map(|f| f.len()).max().unwrap_or(0)
    }
}
