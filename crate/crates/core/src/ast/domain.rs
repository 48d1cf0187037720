use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::One;
use thiserror::Error;

use super::value::{fmt_rat, Rat};
use super::{EvalError, Pred, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("variable `{0}` is declared twice")]
    Duplicate(Var),
    #[error("variable `{0}` has an empty domain")]
    Empty(Var),
    #[error("range {lo}..{hi} for `{var}` is invalid")]
    BadRange { var: Var, lo: String, hi: String },
    #[error("init filter failed at {state}: {source}")]
    Init { state: ProgState, source: EvalError },
}

/// The finite value set declared for one variable.
#[derive(Clone, Debug, PartialEq)]
pub struct VarDomain {
    pub name: Var,
    /// Sorted ascending, without duplicates.
    pub values: Vec<Rat>,
    /// Declared as an explicit sample set rather than a range.
    pub sampled: bool,
}

impl VarDomain {
    pub fn range(name: &str, lo: i64, hi: i64) -> Self {
        VarDomain {
            name: Var::new(name),
            values: (lo..=hi).map(super::rat).collect(),
            sampled: false,
        }
    }

    pub fn set(name: &str, values: impl IntoIterator<Item = Rat>) -> Self {
        let mut values: Vec<Rat> = values.into_iter().collect();
        values.sort();
        values.dedup();
        VarDomain { name: Var::new(name), values, sampled: true }
    }

    /// Integer-stepped inclusive range starting at `lo`.
    pub fn stepped(name: &str, lo: &Rat, hi: &Rat) -> Result<Self, DomainError> {
        if lo > hi {
            return Err(DomainError::BadRange {
                var: Var::new(name),
                lo: fmt_rat(lo),
                hi: fmt_rat(hi),
            });
        }
        let mut values = Vec::new();
        let mut v = lo.clone();
        while &v <= hi {
            values.push(v.clone());
            v += Rat::one();
        }
        Ok(VarDomain { name: Var::new(name), values, sampled: false })
    }
}

/// A total assignment of values to the domain variables.
#[derive(Clone)]
pub struct ProgState {
    names: Arc<[Var]>,
    vals: Vec<Rat>,
}

impl ProgState {
    pub fn new(names: Arc<[Var]>, vals: Vec<Rat>) -> Self {
        debug_assert_eq!(names.len(), vals.len());
        ProgState { names, vals }
    }

    /// Builds a state from `(name, value)` pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Rat)>) -> Self {
        let (names, vals): (Vec<Var>, Vec<Rat>) =
            pairs.into_iter().map(|(n, v)| (Var::new(n), v)).unzip();
        ProgState { names: names.into(), vals }
    }

    pub fn get(&self, v: &Var) -> Option<&Rat> {
        self.names.iter().position(|n| n == v).map(|i| &self.vals[i])
    }

    pub fn index_of(&self, v: &Var) -> Option<usize> {
        self.names.iter().position(|n| n == v)
    }

    pub fn values(&self) -> &[Rat] {
        &self.vals
    }

    pub fn names(&self) -> &[Var] {
        &self.names
    }

    pub fn set_index(&mut self, i: usize, val: Rat) {
        self.vals[i] = val;
    }

    /// Returns a copy with `v` bound to `val`, adding the variable if absent.
    pub fn with(&self, v: &Var, val: Rat) -> ProgState {
        match self.index_of(v) {
            Some(i) => {
                let mut s = self.clone();
                s.vals[i] = val;
                s
            }
            None => {
                let mut names: Vec<Var> = self.names.to_vec();
                names.push(v.clone());
                let mut vals = self.vals.clone();
                vals.push(val);
                ProgState { names: names.into(), vals }
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Rat)> {
        self.names.iter().zip(self.vals.iter())
    }
}

impl PartialEq for ProgState {
    fn eq(&self, other: &Self) -> bool {
        self.vals == other.vals && self.names == other.names
    }
}

impl Eq for ProgState {}

impl Hash for ProgState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.vals.hash(state);
    }
}

/// Serialized as a map from variable name to the value's `n` or `n/d` text.
impl serde::Serialize for ProgState {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = ser.serialize_map(Some(self.vals.len()))?;
        for (n, v) in self.iter() {
            m.serialize_entry(n.as_str(), &fmt_rat(v))?;
        }
        m.end()
    }
}

impl fmt::Display for ProgState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (n, v)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", n, fmt_rat(v))?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for ProgState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Declared finite value sets for every variable plus an optional filter on
/// initial states.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDomain {
    vars: Vec<VarDomain>,
    names: Arc<[Var]>,
    init: Option<Pred>,
}

impl FiniteDomain {
    pub fn new(vars: Vec<VarDomain>, init: Option<Pred>) -> Result<Self, DomainError> {
        for (i, v) in vars.iter().enumerate() {
            if v.values.is_empty() {
                return Err(DomainError::Empty(v.name.clone()));
            }
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(DomainError::Duplicate(v.name.clone()));
            }
        }
        let names: Arc<[Var]> = vars.iter().map(|v| v.name.clone()).collect();
        Ok(FiniteDomain { vars, names, init })
    }

    pub fn vars(&self) -> &[VarDomain] {
        &self.vars
    }

    pub fn names(&self) -> &Arc<[Var]> {
        &self.names
    }

    pub fn init(&self) -> Option<&Pred> {
        self.init.as_ref()
    }

    pub fn with_init(&self, init: Option<Pred>) -> Self {
        FiniteDomain { init, ..self.clone() }
    }

    pub fn index_of(&self, v: &Var) -> Option<usize> {
        self.names.iter().position(|n| n == v)
    }

    pub fn contains(&self, index: usize, val: &Rat) -> bool {
        self.vars[index].values.binary_search(val).is_ok()
    }

    /// Number of states in the full product, ignoring the init filter.
    pub fn size(&self) -> usize {
        self.vars.iter().map(|v| v.values.len()).product()
    }

    /// True when some variable was declared as an explicit sample set.
    pub fn sampled(&self) -> bool {
        self.vars.iter().any(|v| v.sampled)
    }

    /// All states in enumeration order: declaration order, first variable
    /// most significant, values ascending.
    pub fn states(&self) -> impl Iterator<Item = ProgState> + '_ {
        let mut idx = vec![0usize; self.vars.len()];
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let vals = idx
                .iter()
                .zip(&self.vars)
                .map(|(&i, v)| v.values[i].clone())
                .collect();
            let st = ProgState::new(self.names.clone(), vals);
            done = true;
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.vars[k].values.len() {
                    done = false;
                    break;
                }
                idx[k] = 0;
            }
            Some(st)
        })
    }

    /// States that pass the init filter, in enumeration order.
    pub fn initial_states(&self) -> Result<Vec<ProgState>, DomainError> {
        let mut out = Vec::new();
        for st in self.states() {
            let keep = match &self.init {
                None => true,
                Some(p) => p
                    .eval(&st)
                    .map_err(|source| DomainError::Init { state: st.clone(), source })?,
            };
            if keep {
                out.push(st);
            }
        }
        Ok(out)
    }
}
