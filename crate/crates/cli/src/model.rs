//! Materializes the built-in test models as problem files.

use serde_json::json;

use tqft_algebra::exactlin::Rational;

use crate::commands::polyvector;
use crate::schema::{self, CommutativityPayload, FamilyIn, FamilyModeIn, HodgeIn, InputError, PolyvectorIn, ProblemFile, SaitoPayload, SpaceIn};

fn space_in(s: &tqft_algebra::exactlin::GradedSpace) -> SpaceIn {
    SpaceIn { parity: s.parity.to_vec(), labels: Some(s.labels()) }
}

/// Polyvector model of `W′` with the monomial family `Σ_k t_{k+1} x^k`,
/// `k < deg W′`, as a commutativity problem.
pub fn polyvector_problem(p: &PolyvectorIn) -> Result<ProblemFile, InputError> {
    let m = polyvector(p, "")?;
    let d = match p.window {
        Some(w) => m.hodge_windowed(w),
        None => m.hodge(),
    };
    let hodge = HodgeIn {
        space: space_in(&d.complex.space),
        w: space_in(&d.w),
        q: schema::render::<Rational>(&d.complex.q.mat),
        g: schema::render(&d.g.mat),
        g_minus: schema::render(&d.g_minus.mat),
        i_w: schema::render(&d.i_w.mat),
        pi_w: schema::render(&d.pi_w.mat),
        window: d.window.clone(),
    };
    let linear = (0..m.degree()).map(|k| schema::render(&m.mult_monomial(k).mat)).collect();
    let payload = CommutativityPayload { hodge, family: FamilyIn { mode: FamilyModeIn::Auto, linear } };
    Ok(ProblemFile { kind: "commutativity".into(), payload: json!(payload) })
}

pub fn saito_problem(n: usize, search_bound: Option<u32>) -> Result<ProblemFile, InputError> {
    if n < 3 {
        return Err(InputError::at("n", "the singularity x^n needs n >= 3"));
    }
    Ok(ProblemFile { kind: "saito".into(), payload: json!(SaitoPayload { n, search_bound }) })
}
