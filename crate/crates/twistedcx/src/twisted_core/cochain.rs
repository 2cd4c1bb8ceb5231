use std::collections::BTreeMap;

use crate::cover_model::{Face, Tuple};
use crate::exact_linalg::{Field, Matrix, Scalar};

use super::family::LocalFamily;
use super::morphism::{sign, Morphism};

/// Čech cochain over the open `U_base` (base may be empty: the whole space).
/// The component at `t` (Čech degree p) is a section of `E_{t0}^{deg-p}` over
/// `set(t) ∪ base`. Components are matrices with `cols` columns so that many
/// cochains can be carried at once; a single cochain has one column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    pub field: Field,
    pub base: Face,
    pub deg: i32,
    pub cols: usize,
    comps: BTreeMap<Tuple, Matrix>,
}

impl Cochain {
    pub fn zero(field: Field, base: Face, deg: i32, cols: usize) -> Cochain {
        Cochain {
            field,
            base,
            deg,
            cols,
            comps: BTreeMap::new(),
        }
    }

    pub fn comps(&self) -> &BTreeMap<Tuple, Matrix> {
        &self.comps
    }

    pub fn get(&self, t: &[usize]) -> Option<&Matrix> {
        self.comps.get(t)
    }

    pub fn add_at(&mut self, t: &[usize], m: Matrix) {
        assert_eq!(m.cols(), self.cols, "cochain column count");
        let v = match self.comps.remove(t) {
            Some(cur) => cur.add(&m),
            None => m,
        };
        if !v.is_zero() {
            self.comps.insert(t.to_vec(), v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn axpy(&self, x: &Scalar, o: &Cochain) -> Cochain {
        assert_eq!((self.base, self.deg, self.cols), (o.base, o.deg, o.cols));
        let mut r = self.clone();
        for (t, m) in &o.comps {
            r.add_at(t, m.scale(x));
        }
        r
    }

    pub fn add(&self, o: &Cochain) -> Cochain {
        self.axpy(&self.field.one(), o)
    }

    /// `(u·c)_{i0..i_{p+r}} = (-1)^{qr} u_{i0..ip}(c_{ip..i_{p+r}})`, with `c` restricted to the big face.
    pub fn act(u: &Morphism, c: &Cochain, src: &LocalFamily) -> Cochain {
        let mut by_first: BTreeMap<usize, Vec<(&Tuple, &Matrix)>> = BTreeMap::new();
        for (t, m) in &c.comps {
            by_first.entry(t[0]).or_default().push((t, m));
        }
        let mut out = Cochain::zero(c.field, c.base, c.deg + u.deg(), c.cols);
        for (t1, maps) in u.comps() {
            let q = u.deg() as i64 - (t1.len() as i64 - 1);
            let Some(list) = by_first.get(t1.last().unwrap()) else {
                continue;
            };
            for (t2, v) in list {
                let r = t2.len() as i64 - 1;
                let mut t = t1.clone();
                t.extend_from_slice(&t2[1..]);
                let big = Face::of(&t).union(c.base);
                let Some(m) = maps.get(&big) else {
                    continue;
                };
                let n2 = c.deg - r as i32;
                let from = Face::of(t2).union(c.base);
                let rv = src.get(t2[0]).restriction(from, big).at(n2).mul(v);
                out.add_at(&t, m.at(n2).mul(&rv).scale(&sign(c.field, q * r)));
            }
        }
        out
    }

    /// `(δc)_{i0..i_{p+1}} = Σ_{k=1}^{p+1} (-1)^k c_{i0..î_k..i_{p+1}}`, restricted to the big face.
    pub fn delta(&self, fam: &LocalFamily) -> Cochain {
        let nerve = fam.nerve();
        let mut out = Cochain::zero(self.field, self.base, self.deg + 1, self.cols);
        for (s, v) in &self.comps {
            let p = s.len() - 1;
            let from = Face::of(s).union(self.base);
            let n = self.deg - p as i32;
            let obj = fam.get(s[0]);
            for x in 0..nerve.len() {
                let big = from.with(x);
                if !nerve.is_face(big) {
                    continue;
                }
                let rv = obj.restriction(from, big).at(n).mul(v);
                for k in 1..=p + 1 {
                    let mut t = s[..k].to_vec();
                    t.push(x);
                    t.extend_from_slice(&s[k..]);
                    out.add_at(&t, rv.scale(&sign(self.field, k as i64)));
                }
            }
        }
        out
    }

    /// `δ_a c = δc + a·c`.
    pub fn delta_a(&self, a: &Morphism, fam: &LocalFamily) -> Cochain {
        self.delta(fam).add(&Cochain::act(a, self, fam))
    }
}
