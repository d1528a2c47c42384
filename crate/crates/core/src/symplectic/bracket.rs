//! Poisson brackets, `{f, g} = <df/dp, dg/dx> - <df/dx, dg/dp>`.

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::diff::NESTED_STEP;
use crate::symplectic::field::{fd_gradient, ScalarField};
use crate::symplectic::phase::{dot, PhasePoint};

pub fn poisson_bracket(f: &dyn ScalarField, g: &dyn ScalarField, z: &PhasePoint) -> Result<f64> {
    let (fx, fp) = f.gradient(z);
    let (gx, gp) = g.gradient(z);
    let v = dot(&fp, &gx) - dot(&fx, &gp);
    if !v.is_finite() {
        return Err(Error::Evaluation {
            what: "Poisson bracket".into(),
            at: z.to_vec(),
        });
    }
    Ok(v)
}

/// `{f, g}` realised as a field, differentiated with the wider nested step.
pub struct BracketField<'a> {
    f: &'a dyn ScalarField,
    g: &'a dyn ScalarField,
}

impl<'a> BracketField<'a> {
    pub fn new(f: &'a dyn ScalarField, g: &'a dyn ScalarField) -> Self {
        BracketField { f, g }
    }
}

impl fmt::Debug for BracketField<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{:?}, {:?}}}", self.f, self.g)
    }
}

impl ScalarField for BracketField<'_> {
    fn value(&self, z: &PhasePoint) -> f64 {
        poisson_bracket(self.f, self.g, z).unwrap_or(f64::NAN)
    }

    fn gradient(&self, z: &PhasePoint) -> (Vec<f64>, Vec<f64>) {
        fd_gradient(self, z, NESTED_STEP * (1.0 + z.norm()))
    }
}

/// Right-nested bracket `{a_1, {a_2, ... {a_{k-1}, a_k}}}` for `k` in 2..=3.
pub fn nested(fields: &[&dyn ScalarField], z: &PhasePoint) -> Result<f64> {
    match fields {
        [a, b] => poisson_bracket(*a, *b, z),
        [a, b, c] => {
            let inner = BracketField::new(*b, *c);
            poisson_bracket(*a, &inner, z)
        }
        _ if fields.len() > 3 => Err(Error::UnsupportedDepth(fields.len())),
        _ => Err(Error::InvalidInput(format!(
            "a bracket needs at least two fields, got {}",
            fields.len()
        ))),
    }
}

/// Evaluates a nested bracket described by a word over `{f, g}`, read as a
/// right-nested bracket: `"ffg"` is `{f, {f, g}}`, `"gf"` is `{g, f}`.
pub fn nested_bracket(f: &dyn ScalarField, g: &dyn ScalarField, z: &PhasePoint, pattern: &str) -> Result<f64> {
    let fields = pattern
        .chars()
        .map(|c| match c {
            'f' => Ok(f),
            'g' => Ok(g),
            other => Err(Error::InvalidInput(format!(
                "bracket pattern letter `{other}` is not f or g"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    if fields.len() > 3 {
        return Err(Error::UnsupportedDepth(fields.len()));
    }
    nested(&fields, z)
}
