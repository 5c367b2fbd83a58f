//! Summation-by-parts identities and product bounds of the discrete calculus.
//!
//! Each identity is evaluated on concrete grid functions and reported as a
//! defect together with a rounding scale, so callers can test
//! `defect <= tol * scale`. The scale of a scalar identity is the sum of
//! the absolute inner products `dx * sum |a_j b_j|` of its terms, which
//! bounds the accumulated rounding error; vector identities use sup norms.
//!
//! The squared-product norm is stated in its exact form
//! `|D(v^2)|^2 = 4 <(Dv)^2, ((S+ v + S- v) / 2)^2>`, which follows from
//! `D(v^2) = Dv (S+ v + S- v)`.

use alloc::vec::Vec;

use crate::error::Result;
use crate::grid::GridFunction;

/// Outcome of one identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub defect: f64,
    pub scale: f64,
}

impl IdentityCheck {
    pub fn residual(&self) -> f64 {
        if self.scale > 0.0 {
            self.defect / self.scale
        } else {
            self.defect
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.residual() <= tol
    }
}

/// Outcome of one inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalityCheck {
    /// Allows rounding slack of `1e-12 (|lhs| + |rhs|)`.
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-12 * (self.lhs.abs() + self.rhs.abs())
    }
}

fn abs_inner(a: &GridFunction, b: &GridFunction) -> f64 {
    let dx = a.grid().dx();
    dx * a.values().iter().zip(b.values()).map(|(x, y)| (x * y).abs()).sum::<f64>()
}

fn scalar(name: &'static str, lhs: f64, rhs: f64, scale: f64) -> IdentityCheck {
    IdentityCheck {
        name,
        defect: (lhs - rhs).abs(),
        scale,
    }
}

fn vector(name: &'static str, lhs: &GridFunction, terms: &[&GridFunction]) -> Result<IdentityCheck> {
    let mut rhs = GridFunction::zeros(*lhs.grid());
    let mut scale = lhs.linf_norm();
    for t in terms {
        rhs = rhs.add(t)?;
        scale += t.linf_norm();
    }
    Ok(IdentityCheck {
        name,
        defect: lhs.sub(&rhs)?.linf_norm(),
        scale,
    })
}

/// `D(vw) = v Dw + (S+ w D+ v + S- w D- v) / 2`.
pub fn product_rule_mean(v: &GridFunction, w: &GridFunction) -> Result<IdentityCheck> {
    let lhs = v.pointwise_mul(w)?.d_center();
    let t1 = v.pointwise_mul(&w.d_center())?;
    let t2 = w.shift(1).pointwise_mul(&v.d_plus())?.scale(0.5);
    let t3 = w.shift(-1).pointwise_mul(&v.d_minus())?.scale(0.5);
    vector("product_rule_mean", &lhs, &[&t1, &t2, &t3])
}

/// `D(vw) = S+ v Dw + Dv S- w`.
pub fn product_rule_shifted(v: &GridFunction, w: &GridFunction) -> Result<IdentityCheck> {
    let lhs = v.pointwise_mul(w)?.d_center();
    let t1 = v.shift(1).pointwise_mul(&w.d_center())?;
    let t2 = v.d_center().pointwise_mul(&w.shift(-1))?;
    vector("product_rule_shifted", &lhs, &[&t1, &t2])
}

/// `D+(vw) = S+ v D+ w + w D+ v`.
pub fn product_rule_forward(v: &GridFunction, w: &GridFunction) -> Result<IdentityCheck> {
    let lhs = v.pointwise_mul(w)?.d_plus();
    let t1 = v.shift(1).pointwise_mul(&w.d_plus())?;
    let t2 = w.pointwise_mul(&v.d_plus())?;
    vector("product_rule_forward", &lhs, &[&t1, &t2])
}

/// `<D+ v, w> = -<v, D- w>`.
pub fn parts_forward(v: &GridFunction, w: &GridFunction) -> Result<IdentityCheck> {
    let (a, b) = (v.d_plus(), w.d_minus());
    Ok(scalar(
        "parts_forward",
        a.inner(w)?,
        -v.inner(&b)?,
        abs_inner(&a, w) + abs_inner(v, &b),
    ))
}

/// `<Dv, w> = -<v, Dw>`.
pub fn parts_centered(v: &GridFunction, w: &GridFunction) -> Result<IdentityCheck> {
    let (a, b) = (v.d_center(), w.d_center());
    Ok(scalar(
        "parts_centered",
        a.inner(w)?,
        -v.inner(&b)?,
        abs_inner(&a, w) + abs_inner(v, &b),
    ))
}

/// `<v, D+ v> = -(dx / 2) |D+ v|^2`.
pub fn v_dot_forward(v: &GridFunction) -> Result<IdentityCheck> {
    let dx = v.grid().dx();
    let a = v.d_plus();
    Ok(scalar(
        "v_dot_forward",
        v.inner(&a)?,
        -0.5 * dx * a.norm_sq(),
        abs_inner(v, &a) + 0.5 * dx * a.norm_sq(),
    ))
}

/// `<v, D(vw)> = <D+ w, v S+ v> / 2`.
pub fn v_dot_d_vw(v: &GridFunction, w: &GridFunction) -> Result<IdentityCheck> {
    let dvw = v.pointwise_mul(w)?.d_center();
    let dw = w.d_plus();
    let vsv = v.pointwise_mul(&v.shift(1))?;
    Ok(scalar(
        "v_dot_d_vw",
        v.inner(&dvw)?,
        0.5 * dw.inner(&vsv)?,
        abs_inner(v, &dvw) + 0.5 * abs_inner(&dw, &vsv),
    ))
}

/// `<D+D- v, D(vw)> = (<Dw, S- v S+ v> - <D+ w, v S+ v>) / dx^2`.
pub fn lap_dot_d_vw(v: &GridFunction, w: &GridFunction) -> Result<IdentityCheck> {
    let dx2 = v.grid().dx() * v.grid().dx();
    let lv = v.laplacian();
    let dvw = v.pointwise_mul(w)?.d_center();
    let dpw = w.d_plus();
    let dw = w.d_center();
    let vsv = v.pointwise_mul(&v.shift(1))?;
    let svsv = v.shift(-1).pointwise_mul(&v.shift(1))?;
    Ok(scalar(
        "lap_dot_d_vw",
        lv.inner(&dvw)?,
        (dw.inner(&svsv)? - dpw.inner(&vsv)?) / dx2,
        abs_inner(&lv, &dvw) + (abs_inner(&dw, &svsv) + abs_inner(&dpw, &vsv)) / dx2,
    ))
}

/// `<D+D- v, D(v^2)> = <D+ v, (D+ v)^2> / 3 - 4 <Dv, (Dv)^2> / 3`.
pub fn lap_dot_d_v2(v: &GridFunction) -> Result<IdentityCheck> {
    let lv = v.laplacian();
    let dv2 = v.square().d_center();
    let dp = v.d_plus();
    let dc = v.d_center();
    let (dp2, dc2) = (dp.square(), dc.square());
    Ok(scalar(
        "lap_dot_d_v2",
        lv.inner(&dv2)?,
        dp.inner(&dp2)? / 3.0 - 4.0 * dc.inner(&dc2)? / 3.0,
        abs_inner(&lv, &dv2) + abs_inner(&dp, &dp2) / 3.0 + 4.0 * abs_inner(&dc, &dc2) / 3.0,
    ))
}

/// `<v, D(v^2)> = -(dx^2 / 6) <D+ v, (D+ v)^2>`.
pub fn v_dot_d_v2(v: &GridFunction) -> Result<IdentityCheck> {
    let dx2 = v.grid().dx() * v.grid().dx();
    let dv2 = v.square().d_center();
    let dp = v.d_plus();
    let dp2 = dp.square();
    Ok(scalar(
        "v_dot_d_v2",
        v.inner(&dv2)?,
        -dx2 / 6.0 * dp.inner(&dp2)?,
        abs_inner(v, &dv2) + dx2 / 6.0 * abs_inner(&dp, &dp2),
    ))
}

/// `|D(v^2)|^2 = 4 <(Dv)^2, ((S+ v + S- v) / 2)^2>`.
pub fn norm_d_v2(v: &GridFunction) -> Result<IdentityCheck> {
    let dv2 = v.square().d_center();
    let dc2 = v.d_center().square();
    let mean2 = v.shift(1).add(&v.shift(-1))?.scale(0.5).square();
    let rhs = 4.0 * dc2.inner(&mean2)?;
    Ok(scalar("norm_d_v2", dv2.norm_sq(), rhs, dv2.norm_sq() + rhs))
}

/// `|D+D- v|^2 = (4 / dx^2) (|D+ v|^2 - |Dv|^2)`.
pub fn norm_lap(v: &GridFunction) -> Result<IdentityCheck> {
    let dx2 = v.grid().dx() * v.grid().dx();
    let l = v.laplacian().norm_sq();
    let (p, c) = (v.d_plus().norm_sq(), v.d_center().norm_sq());
    Ok(scalar("norm_lap", l, 4.0 / dx2 * (p - c), l + 4.0 / dx2 * (p + c)))
}

/// `|D(vw)|^2 <= (|w|^2 + dt |D+ w|^2) |Dv|^2 + (|w|^2 / dt + 3 |D+ w|^2 / 4) |v|^2`
/// with sup norms on `w`.
pub fn norm_d_vw_bound(v: &GridFunction, w: &GridFunction, dt: f64) -> Result<InequalityCheck> {
    let lhs = v.pointwise_mul(w)?.d_center().norm_sq();
    let wi = w.linf_norm();
    let dwi = w.d_plus().linf_norm();
    let rhs = (wi * wi + dt * dwi * dwi) * v.d_center().norm_sq()
        + (wi * wi / dt + 0.75 * dwi * dwi) * v.norm_sq();
    Ok(InequalityCheck {
        name: "norm_d_vw_bound",
        lhs,
        rhs,
    })
}

/// `<D(vw), D(v^2)> <= 2 |v| |w| |Dv|^2 - (8 dx^2 / 3) <Dw, (Dv)^3> - (2/3) <DDw, v^3>`
/// with sup norms on `v` and `w`.
pub fn d_vw_dot_d_v2_bound(v: &GridFunction, w: &GridFunction) -> Result<InequalityCheck> {
    let dx2 = v.grid().dx() * v.grid().dx();
    let lhs = v.pointwise_mul(w)?.d_center().inner(&v.square().d_center())?;
    let dv = v.d_center();
    let dv3 = dv.map(|x| x * x * x);
    let v3 = v.map(|x| x * x * x);
    let dw = w.d_center();
    let rhs = 2.0 * v.linf_norm() * w.linf_norm() * dv.norm_sq()
        - 8.0 * dx2 / 3.0 * dw.inner(&dv3)?
        - 2.0 / 3.0 * dw.d_center().inner(&v3)?;
    Ok(InequalityCheck {
        name: "d_vw_dot_d_v2_bound",
        lhs,
        rhs,
    })
}

/// Every identity on the pair `(v, w)`; the one-field identities use `v`.
pub fn all_identities(v: &GridFunction, w: &GridFunction) -> Result<Vec<IdentityCheck>> {
    Ok(alloc::vec![
        product_rule_mean(v, w)?,
        product_rule_shifted(v, w)?,
        product_rule_forward(v, w)?,
        parts_forward(v, w)?,
        parts_centered(v, w)?,
        v_dot_forward(v)?,
        v_dot_d_vw(v, w)?,
        lap_dot_d_vw(v, w)?,
        lap_dot_d_v2(v)?,
        v_dot_d_v2(v)?,
        norm_d_v2(v)?,
        norm_lap(v)?,
    ])
}

/// Both inequalities on `(v, w)`.
pub fn all_inequalities(v: &GridFunction, w: &GridFunction, dt: f64) -> Result<Vec<InequalityCheck>> {
    Ok(alloc::vec![norm_d_vw_bound(v, w, dt)?, d_vw_dot_d_v2_bound(v, w)?])
}

/// Names in the order [`all_identities`] reports them.
pub const IDENTITY_NAMES: [&str; 12] = [
    "product_rule_mean",
    "product_rule_shifted",
    "product_rule_forward",
    "parts_forward",
    "parts_centered",
    "v_dot_forward",
    "v_dot_d_vw",
    "lap_dot_d_vw",
    "lap_dot_d_v2",
    "v_dot_d_v2",
    "norm_d_v2",
    "norm_lap",
];

/// Names in the order [`all_inequalities`] reports them.
pub const INEQUALITY_NAMES: [&str; 2] = ["norm_d_vw_bound", "d_vw_dot_d_v2_bound"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    fn field(grid: Grid, vals: &[f64]) -> GridFunction {
        GridFunction::new(grid, vals.to_vec()).unwrap()
    }

    #[test]
    fn squared_product_norm_hand_case() {
        // v = (1, 2, 0, 0) on dx = 1: D(v^2) = (2, -0.5, -2, 0.5), norm^2 = 8.5
        let g = Grid::new(4.0, 4).unwrap();
        let v = field(g, &[1.0, 2.0, 0.0, 0.0]);
        let c = norm_d_v2(&v).unwrap();
        assert!((v.square().d_center().norm_sq() - 8.5).abs() < 1e-15);
        assert!(c.holds(1e-15));
    }

    #[test]
    fn constants_make_every_defect_vanish() {
        let g = Grid::new(3.0, 8).unwrap();
        let v = GridFunction::constant(g, 2.5);
        let w = GridFunction::constant(g, -1.0);
        for c in all_identities(&v, &w).unwrap() {
            assert_eq!(c.defect, 0.0, "{}", c.name);
        }
    }

    #[test]
    fn names_match_report_order() {
        let g = Grid::new(1.0, 8).unwrap();
        let v = GridFunction::from_fn(g, |x| x.sin());
        let ids = all_identities(&v, &v).unwrap();
        let names: Vec<_> = ids.iter().map(|c| c.name).collect();
        assert_eq!(names, IDENTITY_NAMES);
        let ineq = all_inequalities(&v, &v, 0.1).unwrap();
        assert_eq!(ineq.iter().map(|c| c.name).collect::<Vec<_>>(), INEQUALITY_NAMES);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn identities_hold_on_random_fields(
            vals in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 8..80),
            dx in 0.01f64..2.0,
        ) {
            let n = vals.len();
            let g = Grid::new(dx * n as f64, n).unwrap();
            let v = field(g, &vals.iter().map(|p| p.0).collect::<Vec<_>>());
            let w = field(g, &vals.iter().map(|p| p.1).collect::<Vec<_>>());
            for c in all_identities(&v, &w).unwrap() {
                prop_assert!(c.holds(1e-12), "{} residual {}", c.name, c.residual());
            }
        }

        #[test]
        fn inequalities_hold_on_random_fields(
            vals in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 8..80),
            dx in 0.01f64..2.0,
            log_dt in -5.0f64..1.0,
        ) {
            let n = vals.len();
            let g = Grid::new(dx * n as f64, n).unwrap();
            let v = field(g, &vals.iter().map(|p| p.0).collect::<Vec<_>>());
            let w = field(g, &vals.iter().map(|p| p.1).collect::<Vec<_>>());
            for c in all_inequalities(&v, &w, 10f64.powf(log_dt)).unwrap() {
                prop_assert!(c.holds(), "{}: {} > {}", c.name, c.lhs, c.rhs);
            }
        }
    }
}
