//! The on-disk input format: one JSON object. Matrices are row-major arrays of
//! strings so that entries stay exact (`"3"`, `"-1/2"`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Degree (as a string key) to matrix.
pub type GradedDoc = BTreeMap<String, Vec<Vec<String>>>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub opens: Vec<String>,
    /// Faces as lists of open labels; subsets and singletons are implied.
    #[serde(default)]
    pub faces: Vec<Vec<String>>,
    #[serde(default)]
    pub presheaves: BTreeMap<String, PresheafDoc>,
    #[serde(default)]
    pub twisted: BTreeMap<String, TwistedDoc>,
    #[serde(default)]
    pub morphisms: BTreeMap<String, MorphismDoc>,
}

/// A presheaf of graded spaces on the nerve; faces not listed carry zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresheafDoc {
    /// Face key `"U,V"` to degree to dimension.
    pub spaces: BTreeMap<String, BTreeMap<String, usize>>,
    /// Restrictions that add one open; missing ones are zero, longer ones are composites.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub restrictions: Vec<RestrictionDoc>,
    /// Degree +1 differential per face; defaults to zero.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub differential: BTreeMap<String, GradedDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionDoc {
    pub from: String,
    pub to: String,
    pub maps: GradedDoc,
}

/// Locals name a presheaf per open; only its values on the star of the open are used.
/// The local differentials are the components at one-element tuples.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistedDoc {
    pub locals: BTreeMap<String, String>,
    #[serde(default)]
    pub components: Vec<ComponentDoc>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub generalized: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub tuple: Vec<String>,
    pub face: String,
    pub maps: GradedDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub source: String,
    pub target: String,
    pub degree: i32,
    #[serde(default)]
    pub components: Vec<ComponentDoc>,
}
