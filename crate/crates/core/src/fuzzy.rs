//! First-order Takagi-Sugeno fuzzy inference.
//!
//! A [`TsFis`] maps a crisp input vector to one crisp output: Gaussian
//! membership degrees are combined per rule with the product t-norm,
//! firing strengths are normalized, and the output is the weighted
//! average of the rules' affine consequents. Everything here is a pure
//! function over immutable values; a `TsFis` can be shared across
//! threads freely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian membership function `exp(-(x - center)^2 / (2 sigma^2))`.
///
/// Defined on all of R: evaluation never clips, so inputs outside the
/// owning [`InputSpec`]'s `[lo, hi]` range extrapolate smoothly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMf {
    pub center: f64,
    pub sigma: f64,
}

impl GaussianMf {
    pub fn new(center: f64, sigma: f64) -> Result<Self> {
        if !center.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "Gaussian MF needs finite center and sigma > 0, got center={center}, sigma={sigma}"
            )));
        }
        Ok(Self { center, sigma })
    }

    /// Membership degree of `x`, in (0, 1]; equals 1 exactly at the center.
    pub fn membership(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "membership input must be finite, got {x}"
            )));
        }
        if self.sigma <= 0.0 || !self.sigma.is_finite() || !self.center.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "malformed MF: center={}, sigma={}",
                self.center, self.sigma
            )));
        }
        Ok(self.value(x))
    }

    /// Unchecked evaluation; callers must have validated `x` and the MF.
    pub(crate) fn value(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.sigma;
        (-0.5 * z * z).exp()
    }
}

/// One input variable: its signal name, the operating range used for MF
/// initialization and surface axes, and the ordered MF grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub mfs: Vec<GaussianMf>,
}

impl InputSpec {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, mfs: Vec<GaussianMf>) -> Result<Self> {
        let name = name.into();
        if lo >= hi || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "input '{name}' needs finite lo < hi, got lo={lo}, hi={hi}"
            )));
        }
        if mfs.is_empty() {
            return Err(Error::InvalidArgument(format!("input '{name}' needs at least one MF")));
        }
        if mfs.windows(2).any(|w| w[0].center > w[1].center) {
            return Err(Error::InvalidArgument(format!(
                "input '{name}' MF centers must be sorted ascending"
            )));
        }
        Ok(Self { name, lo, hi, mfs })
    }
}

/// One rule: an MF index per input plus affine consequent coefficients
/// `p[0] + sum_k p[k] * x[k]` (length = number of inputs + 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub antecedent: Vec<usize>,
    pub consequent: Vec<f64>,
}

impl Rule {
    /// The consequent's affine function evaluated at `x`.
    pub fn consequent_value(&self, x: &[f64]) -> f64 {
        let mut y = self.consequent[0];
        for (k, &xk) in x.iter().enumerate() {
            y += self.consequent[k + 1] * xk;
        }
        y
    }
}

/// A first-order Takagi-Sugeno system: n inputs, one output.
///
/// Multi-output controllers are parallel `TsFis` instances sharing the
/// same inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsFis {
    pub inputs: Vec<InputSpec>,
    pub output_name: String,
    pub rules: Vec<Rule>,
}

impl TsFis {
    pub fn new(
        inputs: Vec<InputSpec>,
        output_name: impl Into<String>,
        rules: Vec<Rule>,
    ) -> Result<Self> {
        let fis = Self { inputs, output_name: output_name.into(), rules };
        fis.validate()?;
        Ok(fis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::InvalidArgument("FIS needs at least one input".into()));
        }
        if self.rules.is_empty() {
            return Err(Error::InvalidArgument("FIS needs at least one rule".into()));
        }
        let n = self.inputs.len();
        for (i, rule) in self.rules.iter().enumerate() {
            if rule.antecedent.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "rule {i}: antecedent length {} != {n} inputs",
                    rule.antecedent.len()
                )));
            }
            if rule.consequent.len() != n + 1 {
                return Err(Error::InvalidArgument(format!(
                    "rule {i}: consequent length {} != {} (inputs + 1)",
                    rule.consequent.len(),
                    n + 1
                )));
            }
            for (k, &mi) in rule.antecedent.iter().enumerate() {
                if mi >= self.inputs[k].mfs.len() {
                    return Err(Error::InvalidArgument(format!(
                        "rule {i}: MF index {mi} out of range for input '{}'",
                        self.inputs[k].name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn n_rules(&self) -> usize {
        self.rules.len()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs.len() {
            return Err(Error::InvalidArgument(format!(
                "input vector length {} != {} FIS inputs",
                x.len(),
                self.inputs.len()
            )));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "input vector contains non-finite value {bad}"
            )));
        }
        Ok(())
    }

    /// Per-rule firing strengths: the product over inputs of the rule's
    /// MF degrees. Each entry is in (0, 1] for finite inputs.
    pub fn firing_strengths(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self
            .rules
            .iter()
            .map(|rule| {
                rule.antecedent
                    .iter()
                    .enumerate()
                    .map(|(k, &mi)| self.inputs[k].mfs[mi].value(x[k]))
                    .product()
            })
            .collect())
    }

    /// Weighted-average defuzzification over the affine consequents.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let normalized = normalize(&self.firing_strengths(x)?)?;
        Ok(self.rules.iter().zip(&normalized).map(|(rule, &w)| w * rule.consequent_value(x)).sum())
    }
}

/// Scale firing strengths to sum to 1.
pub fn normalize(w: &[f64]) -> Result<Vec<f64>> {
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::DegenerateFiring(
            "firing strengths must be finite and non-negative".into(),
        ));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateFiring(
            "all firing strengths are zero (inputs too far from every MF)".into(),
        ));
    }
    Ok(w.iter().map(|v| v / total).collect())
}

/// Build the full grid-partition rule base: one rule per combination of
/// MF indices, `prod_k M_k` rules in lexicographic antecedent order,
/// all consequents zeroed.
pub fn grid_partition(inputs: Vec<InputSpec>, output_name: impl Into<String>) -> Result<TsFis> {
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("grid partition needs at least one input".into()));
    }
    for spec in &inputs {
        if spec.mfs.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid partition needs >= 2 MFs per input, '{}' has {}",
                spec.name,
                spec.mfs.len()
            )));
        }
    }
    let n = inputs.len();
    let counts: Vec<usize> = inputs.iter().map(|s| s.mfs.len()).collect();
    let total: usize = counts.iter().product();

    let mut rules = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    loop {
        rules.push(Rule { antecedent: idx.clone(), consequent: vec![0.0; n + 1] });
        // odometer increment, last input fastest
        let mut k = n;
        loop {
            if k == 0 {
                return TsFis::new(inputs, output_name, rules);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// One node of a 2-D response surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub xi: f64,
    pub xj: f64,
    pub y: f64,
}

/// Sample the FIS output on a `resolution x resolution` uniform grid over
/// the `[lo, hi]` ranges of inputs `axis_i` and `axis_j`, with every other
/// input pinned by `fixed` (pairs of input index and value). Row-major
/// order, `axis_i` varying fastest.
pub fn response_surface(
    fis: &TsFis,
    axis_i: usize,
    axis_j: usize,
    fixed: &[(usize, f64)],
    resolution: usize,
) -> Result<Vec<SurfacePoint>> {
    let n = fis.n_inputs();
    if axis_i >= n || axis_j >= n {
        return Err(Error::InvalidArgument(format!(
            "surface axes ({axis_i}, {axis_j}) out of range for {n} inputs"
        )));
    }
    if axis_i == axis_j {
        return Err(Error::InvalidArgument("surface axes must be two distinct inputs".into()));
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "surface resolution must be >= 2, got {resolution}"
        )));
    }

    let mut x = vec![f64::NAN; n];
    for &(k, v) in fixed {
        if k >= n {
            return Err(Error::InvalidArgument(format!(
                "fixed input index {k} out of range for {n} inputs"
            )));
        }
        if k == axis_i || k == axis_j {
            return Err(Error::InvalidArgument(format!(
                "fixed value given for surface axis '{}'",
                fis.inputs[k].name
            )));
        }
        if !x[k].is_nan() {
            return Err(Error::InvalidArgument(format!(
                "duplicate fixed value for input '{}'",
                fis.inputs[k].name
            )));
        }
        x[k] = v;
    }
    for (k, value) in x.iter().enumerate() {
        if k != axis_i && k != axis_j && value.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "missing fixed value for input '{}'",
                fis.inputs[k].name
            )));
        }
    }

    let coord = |spec: &InputSpec, step: usize| {
        spec.lo + (spec.hi - spec.lo) * (step as f64) / ((resolution - 1) as f64)
    };
    let mut grid = Vec::with_capacity(resolution * resolution);
    for jdx in 0..resolution {
        let xj = coord(&fis.inputs[axis_j], jdx);
        for idx in 0..resolution {
            let xi = coord(&fis.inputs[axis_i], idx);
            x[axis_i] = xi;
            x[axis_j] = xj;
            grid.push(SurfacePoint { xi, xj, y: fis.eval(&x)? });
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mf(c: f64, s: f64) -> GaussianMf {
        GaussianMf::new(c, s).unwrap()
    }

    fn single_input_fis(mfs: Vec<GaussianMf>, consequents: Vec<Vec<f64>>) -> TsFis {
        let rules = consequents
            .into_iter()
            .enumerate()
            .map(|(i, consequent)| Rule { antecedent: vec![i], consequent })
            .collect();
        TsFis::new(vec![InputSpec::new("x0", -1.0, 1.0, mfs).unwrap()], "y", rules).unwrap()
    }

    #[test]
    fn membership_peaks_at_center() {
        assert_eq!(mf(0.0, 1.0).membership(0.0).unwrap(), 1.0);
        assert_eq!(mf(2.0, 0.5).membership(2.0).unwrap(), 1.0);
    }

    #[test]
    fn membership_one_sigma_from_center() {
        // independently computed exp(-0.5)
        assert_relative_eq!(
            mf(0.0, 1.0).membership(1.0).unwrap(),
            0.6065306597126334,
            max_relative = 1e-15
        );
    }

    #[test]
    fn membership_rejects_bad_arguments() {
        assert!(mf(0.0, 1.0).membership(f64::NAN).is_err());
        assert!(mf(0.0, 1.0).membership(f64::INFINITY).is_err());
        assert!(GaussianMf::new(0.0, 0.0).is_err());
        assert!(GaussianMf::new(0.0, -1.0).is_err());
    }

    #[test]
    fn firing_strength_is_one_at_rule_centers() {
        let fis = single_input_fis(vec![mf(0.0, 1.0)], vec![vec![0.0, 0.0]]);
        assert_eq!(fis.firing_strengths(&[0.0]).unwrap(), vec![1.0]);

        let two = TsFis::new(
            vec![
                InputSpec::new("a", -1.0, 1.0, vec![mf(0.3, 1.0)]).unwrap(),
                InputSpec::new("b", -1.0, 1.0, vec![mf(-0.7, 2.0)]).unwrap(),
            ],
            "y",
            vec![Rule { antecedent: vec![0, 0], consequent: vec![0.0, 0.0, 0.0] }],
        )
        .unwrap();
        assert_eq!(two.firing_strengths(&[0.3, -0.7]).unwrap(), vec![1.0]);
    }

    #[test]
    fn firing_strength_product_of_two_gaussians() {
        // exp(-0.5)^2 = exp(-1), computed independently
        let two = TsFis::new(
            vec![
                InputSpec::new("a", -1.0, 1.0, vec![mf(0.0, 1.0)]).unwrap(),
                InputSpec::new("b", -1.0, 1.0, vec![mf(0.0, 1.0)]).unwrap(),
            ],
            "y",
            vec![Rule { antecedent: vec![0, 0], consequent: vec![0.0, 0.0, 0.0] }],
        )
        .unwrap();
        let w = two.firing_strengths(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(w[0], 0.36787944117144233, max_relative = 1e-15);
    }

    #[test]
    fn firing_strength_dimension_mismatch() {
        let fis = single_input_fis(vec![mf(0.0, 1.0)], vec![vec![0.0, 0.0]]);
        assert!(matches!(fis.firing_strengths(&[0.0, 1.0]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[0.2, 0.2]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(normalize(&[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(normalize(&[0.3, 0.1, 0.6]).unwrap(), vec![0.3, 0.1, 0.6]);
    }

    #[test]
    fn normalize_rejects_degenerate_input() {
        assert!(matches!(normalize(&[0.0, 0.0]), Err(Error::DegenerateFiring(_))));
        assert!(matches!(normalize(&[f64::NAN, 1.0]), Err(Error::DegenerateFiring(_))));
    }

    #[test]
    fn single_rule_output_is_its_consequent() {
        let fis = TsFis::new(
            vec![
                InputSpec::new("a", -1.0, 1.0, vec![mf(0.5, 1.0)]).unwrap(),
                InputSpec::new("b", -1.0, 1.0, vec![mf(-0.5, 1.0)]).unwrap(),
            ],
            "y",
            vec![Rule { antecedent: vec![0, 0], consequent: vec![1.0, 2.0, 3.0] }],
        )
        .unwrap();
        // single rule: output equals 1 + 2*1 + 3*1 = 6 bit-exactly
        assert_eq!(fis.eval(&[1.0, 1.0]).unwrap(), 6.0);
    }

    #[test]
    fn identical_constant_consequents_collapse() {
        let fis = single_input_fis(
            vec![mf(-0.5, 0.4), mf(0.0, 0.4), mf(0.5, 0.4)],
            vec![vec![7.0, 0.0], vec![7.0, 0.0], vec![7.0, 0.0]],
        );
        for &x in &[-0.9, -0.2, 0.0, 0.35, 1.4] {
            assert_relative_eq!(fis.eval(&[x]).unwrap(), 7.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn symmetric_firing_gives_midpoint() {
        let fis = single_input_fis(
            vec![mf(0.0, 1.0), mf(1.0, 1.0)],
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
        );
        assert_relative_eq!(fis.eval(&[0.5]).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn grid_partition_counts() {
        let spec3 = |name: &str| {
            InputSpec::new(name, 0.0, 1.0, vec![mf(0.0, 0.3), mf(0.5, 0.3), mf(1.0, 0.3)]).unwrap()
        };
        let spec2 =
            |name: &str| InputSpec::new(name, 0.0, 1.0, vec![mf(0.0, 0.5), mf(1.0, 0.5)]).unwrap();

        assert_eq!(grid_partition(vec![spec3("a"), spec3("b")], "y").unwrap().n_rules(), 9);
        assert_eq!(
            grid_partition(vec![spec2("a"), spec2("b"), spec2("c"), spec2("d")], "y")
                .unwrap()
                .n_rules(),
            16
        );
        assert_eq!(grid_partition(vec![spec2("a")], "y").unwrap().n_rules(), 2);
        assert!(grid_partition(vec![], "y").is_err());
    }

    #[test]
    fn grid_partition_is_lexicographic_with_zero_consequents() {
        let spec = |name: &str, m: usize| {
            let mfs = (0..m).map(|i| mf(i as f64, 0.5)).collect();
            InputSpec::new(name, 0.0, 1.0, mfs).unwrap()
        };
        let fis = grid_partition(vec![spec("a", 2), spec("b", 3)], "y").unwrap();
        let antecedents: Vec<Vec<usize>> = fis.rules.iter().map(|r| r.antecedent.clone()).collect();
        assert_eq!(
            antecedents,
            vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2]]
        );
        assert!(fis.rules.iter().all(|r| r.consequent.iter().all(|&c| c == 0.0)));
    }

    #[test]
    fn surface_resolution_two_hits_the_corners() {
        let fis = grid_partition(
            vec![
                InputSpec::new("a", 0.0, 1.0, vec![mf(0.0, 0.5), mf(1.0, 0.5)]).unwrap(),
                InputSpec::new("b", -2.0, 2.0, vec![mf(-2.0, 2.0), mf(2.0, 2.0)]).unwrap(),
            ],
            "y",
        )
        .unwrap();
        let grid = response_surface(&fis, 0, 1, &[], 2).unwrap();
        let coords: Vec<(f64, f64)> = grid.iter().map(|p| (p.xi, p.xj)).collect();
        assert_eq!(coords, vec![(0.0, -2.0), (1.0, -2.0), (0.0, 2.0), (1.0, 2.0)]);
    }

    #[test]
    fn surface_matches_pointwise_eval() {
        let mut fis = grid_partition(
            vec![
                InputSpec::new("a", 0.0, 1.0, vec![mf(0.0, 0.5), mf(1.0, 0.5)]).unwrap(),
                InputSpec::new("b", 0.0, 1.0, vec![mf(0.0, 0.5), mf(1.0, 0.5)]).unwrap(),
                InputSpec::new("c", 0.0, 1.0, vec![mf(0.0, 0.5), mf(1.0, 0.5)]).unwrap(),
            ],
            "y",
        )
        .unwrap();
        for (i, rule) in fis.rules.iter_mut().enumerate() {
            rule.consequent = vec![i as f64, 0.5, -1.0, 2.0];
        }
        let grid = response_surface(&fis, 0, 2, &[(1, 0.25)], 5).unwrap();
        assert_eq!(grid.len(), 25);
        for p in &grid {
            let direct = fis.eval(&[p.xi, 0.25, p.xj]).unwrap();
            assert_eq!(p.y, direct);
        }
    }

    #[test]
    fn surface_rejects_bad_axes_and_fixed_values() {
        let fis = grid_partition(
            vec![
                InputSpec::new("a", 0.0, 1.0, vec![mf(0.0, 0.5), mf(1.0, 0.5)]).unwrap(),
                InputSpec::new("b", 0.0, 1.0, vec![mf(0.0, 0.5), mf(1.0, 0.5)]).unwrap(),
                InputSpec::new("c", 0.0, 1.0, vec![mf(0.0, 0.5), mf(1.0, 0.5)]).unwrap(),
            ],
            "y",
        )
        .unwrap();
        assert!(response_surface(&fis, 0, 0, &[(1, 0.0)], 3).is_err());
        assert!(response_surface(&fis, 0, 5, &[(1, 0.0)], 3).is_err());
        assert!(response_surface(&fis, 0, 2, &[], 3).is_err()); // missing fixed for 'b'
        assert!(response_surface(&fis, 0, 2, &[(1, 0.0)], 1).is_err());
        assert!(response_surface(&fis, 0, 2, &[(1, 0.0), (1, 0.5)], 3).is_err());
    }

    proptest! {
        #[test]
        fn normalized_strengths_sum_to_one(
            centers in proptest::collection::vec(-2.0f64..2.0, 2..5),
            x in -3.0f64..3.0,
        ) {
            let mut sorted = centers.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mfs: Vec<GaussianMf> = sorted.iter().map(|&c| mf(c, 0.8)).collect();
            let n_mfs = mfs.len();
            let fis = single_input_fis(mfs, vec![vec![0.0, 0.0]; n_mfs]);
            let w = fis.firing_strengths(&[x]).unwrap();
            prop_assert!(w.iter().all(|&v| v > 0.0 && v <= 1.0));
            let total: f64 = normalize(&w).unwrap().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn grid_partition_rule_count_is_product(ms in proptest::collection::vec(2usize..5, 1..4)) {
            let inputs: Vec<InputSpec> = ms
                .iter()
                .enumerate()
                .map(|(k, &m)| {
                    let mfs = (0..m).map(|i| mf(i as f64, 0.7)).collect();
                    InputSpec::new(format!("x{k}"), 0.0, (m - 1) as f64 + 0.5, mfs).unwrap()
                })
                .collect();
            let fis = grid_partition(inputs, "y").unwrap();
            prop_assert_eq!(fis.n_rules(), ms.iter().product::<usize>());
        }

        #[test]
        fn evaluation_is_pure(x in -3.0f64..3.0) {
            let fis = single_input_fis(
                vec![mf(-1.0, 0.6), mf(0.0, 0.6), mf(1.0, 0.6)],
                vec![vec![0.5, 1.0], vec![-0.25, 2.0], vec![3.0, -1.0]],
            );
            let a = fis.eval(&[x]).unwrap();
            let b = fis.eval(&[x]).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
