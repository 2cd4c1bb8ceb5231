use crate::cover_model::{CoverNerve, Face, Presheaf};
use crate::exact_linalg::{Field, GradedSpace};

/// One presheaf per open `i`, defined on the star of `{i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFamily {
    nerve: CoverNerve,
    field: Field,
    objs: Vec<Presheaf>,
}

impl LocalFamily {
    pub fn new(nerve: &CoverNerve, objs: Vec<Presheaf>) -> LocalFamily {
        assert_eq!(objs.len(), nerve.len(), "one local object per open");
        let field = objs.first().map(|p| p.field()).unwrap_or(Field::Rational);
        for (i, p) in objs.iter().enumerate() {
            let star = nerve.star(Face::singleton(i));
            assert_eq!(p.domain(), star.as_slice(), "local object {i} must live on the star of {i}");
        }
        LocalFamily {
            nerve: nerve.clone(),
            field,
            objs,
        }
    }

    /// Constant presheaves with the given values.
    pub fn constant(nerve: &CoverNerve, field: Field, spaces: &[GradedSpace]) -> LocalFamily {
        let objs = spaces
            .iter()
            .enumerate()
            .map(|(i, s)| Presheaf::constant(field, &nerve.star(Face::singleton(i)), s))
            .collect();
        LocalFamily {
            nerve: nerve.clone(),
            field,
            objs,
        }
    }

    /// Restriction of a presheaf on all faces to each star.
    pub fn from_global(nerve: &CoverNerve, p: &Presheaf) -> LocalFamily {
        let objs = (0..nerve.len()).map(|i| p.restrict_to_star(Face::singleton(i))).collect();
        LocalFamily {
            nerve: nerve.clone(),
            field: p.field(),
            objs,
        }
    }

    pub fn nerve(&self) -> &CoverNerve {
        &self.nerve
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn len(&self) -> usize {
        self.objs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objs.is_empty()
    }

    pub fn get(&self, i: usize) -> &Presheaf {
        &self.objs[i]
    }

    pub fn objs(&self) -> &[Presheaf] {
        &self.objs
    }

    pub fn space(&self, i: usize, f: Face) -> &GradedSpace {
        self.objs[i].space(f)
    }

    pub fn is_constant(&self) -> bool {
        self.objs.iter().all(|p| p.is_constant())
    }

    pub fn is_zero(&self) -> bool {
        self.objs.iter().all(|p| p.domain().iter().all(|f| p.space(*f).is_zero()))
    }

    /// Smallest and largest degree present in any local object.
    pub fn amplitude(&self) -> Option<(i32, i32)> {
        let amps: Vec<(i32, i32)> = self.objs.iter().filter_map(|p| p.amplitude()).collect();
        let lo = amps.iter().map(|a| a.0).min()?;
        let hi = amps.iter().map(|a| a.1).max()?;
        Some((lo, hi))
    }

    pub fn shifted(&self, k: i32) -> LocalFamily {
        LocalFamily {
            nerve: self.nerve.clone(),
            field: self.field,
            objs: self.objs.iter().map(|p| p.shifted(k)).collect(),
        }
    }

    pub fn direct_sum(&self, o: &LocalFamily) -> LocalFamily {
        LocalFamily {
            nerve: self.nerve.clone(),
            field: self.field,
            objs: self.objs.iter().zip(&o.objs).map(|(a, b)| a.direct_sum(b)).collect(),
        }
    }

    pub fn same_shape(&self, o: &LocalFamily) -> bool {
        self.nerve == o.nerve && self.objs.len() == o.objs.len()
    }
}
