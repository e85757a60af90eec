//! Truncated exponentials `Σ_{k≤N} (-var·A)^k / k!`.

use super::graded::GradedMap;
use super::ring::{Rational, Scalar};
use super::series::Series;
use crate::error::{EngineError, Result};

/// `exp(-t A)` truncated at `order`, where `t` is the series variable `var`.
pub fn exp_truncated<C: Scalar>(a: &GradedMap<Series<C>>, var: usize, order: u32) -> Result<GradedMap<Series<C>>> {
    if a.parity != 0 {
        return Err(EngineError::Parity("exp_truncated needs an even operator".into()));
    }
    let ctx = a.proto().ctx.clone();
    if var >= ctx.nvars() {
        return Err(EngineError::Structural(format!("variable index {} not in the series ring", var)));
    }
    let minus_t = -Series::<C>::var(&ctx, var);
    let step = a.scale_by(&minus_t);
    let mut term = GradedMap::identity(&a.source, a.proto());
    let mut acc = term.clone();
    for k in 1..=order {
        term = step.compose_unchecked(&term).scale(&Rational::new(1.into(), (k as i64).into()));
        if term.is_zero() {
            break;
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::graded::GradedSpace;
    use crate::exactlin::matrix::Mat;
    use crate::exactlin::series::SeriesCtx;

    fn lift(m: &Mat<Rational>, ctx: &std::sync::Arc<SeriesCtx>) -> Mat<Series> {
        m.map(|q| Series::constant(ctx, q.clone()))
    }

    #[test]
    fn nilpotent_terminates() {
        let ctx = SeriesCtx::new(&["t"], 5);
        let v = GradedSpace::from_parities(&[0, 0]);
        let n = crate::exactlin::matrix::rat_mat(&[&[0, 1], &[0, 0]]);
        let a = GradedMap::new_unchecked(v.clone(), v.clone(), 0, lift(&n, &ctx));
        let e = exp_truncated(&a, 0, 5).unwrap();
        let t: Series = Series::var(&ctx, 0);
        assert_eq!(e.mat.get(0, 1), &(-t));
        assert_eq!(e.mat.get(0, 0), &Series::constant(&ctx, Rational::from_integer(1.into())));
    }

    #[test]
    fn odd_rejected() {
        let ctx = SeriesCtx::new(&["t"], 2);
        let v = GradedSpace::from_parities(&[0, 1]);
        let a = GradedMap::zero(&v, &v, 1, &Series::<Rational>::zero(&ctx));
        assert!(exp_truncated(&a, 0, 2).is_err());
    }
}
