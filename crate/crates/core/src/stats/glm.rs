use std::collections::BTreeSet;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponential-family model with its canonical link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Logit,
    FractionalLogit,
    Poisson,
    Identity,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Logit => "logit",
            Family::FractionalLogit => "fractional_logit",
            Family::Poisson => "poisson",
            Family::Identity => "identity",
        }
    }

    /// Inverse link.
    pub fn mean(self, eta: f64) -> f64 {
        match self {
            Family::Logit | Family::FractionalLogit => {
                if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                }
            }
            Family::Poisson => eta.exp(),
            Family::Identity => eta,
        }
    }

    fn link(self, mu: f64) -> f64 {
        match self {
            Family::Logit | Family::FractionalLogit => (mu / (1.0 - mu)).ln(),
            Family::Poisson => mu.ln(),
            Family::Identity => mu,
        }
    }

    fn variance(self, mu: f64) -> f64 {
        match self {
            Family::Logit | Family::FractionalLogit => mu * (1.0 - mu),
            Family::Poisson => mu,
            Family::Identity => 1.0,
        }
    }

    fn check_outcome(self, y: f64) -> bool {
        match self {
            Family::Logit => y == 0.0 || y == 1.0,
            Family::FractionalLogit => (0.0..=1.0).contains(&y),
            Family::Poisson => y >= 0.0 && y.is_finite(),
            Family::Identity => y.is_finite(),
        }
    }

    /// Per-observation log-likelihood (quasi for the fractional and
    /// non-integer Poisson cases; unit variance for identity).
    fn loglik_obs(self, y: f64, eta: f64) -> f64 {
        match self {
            Family::Logit | Family::FractionalLogit => {
                let softplus = eta.max(0.0) + (-eta.abs()).exp().ln_1p();
                y * eta - softplus
            }
            Family::Poisson => y * eta - eta.exp() - libm::lgamma(y + 1.0),
            Family::Identity => -0.5 * (y - eta).powi(2) - 0.5 * (2.0 * std::f64::consts::PI).ln(),
        }
    }

    fn has_likelihood_r2(self) -> bool {
        self != Family::Identity
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logit" => Ok(Family::Logit),
            "fractional_logit" => Ok(Family::FractionalLogit),
            "poisson" => Ok(Family::Poisson),
            "identity" | "linear" | "lpm" => Ok(Family::Identity),
            other => Err(Error::InvalidArgument(format!("unknown family {other:?}"))),
        }
    }
}

/// Outcome, named covariates and optional observation weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub weights: Option<DVector<f64>>,
}

impl DesignMatrix {
    pub fn new(names: Vec<String>, x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if names.len() != x.ncols() || x.nrows() != y.len() {
            return Err(Error::Dimension {
                location: "design matrix".into(),
                expected: x.ncols(),
                found: names.len(),
            });
        }
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(Error::InvalidArgument("duplicate column names".into()));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("design contains non-finite values".into()));
        }
        Ok(DesignMatrix {
            names,
            x,
            y,
            weights: None,
        })
    }

    /// Builds from named columns, optionally prepending an `intercept`.
    pub fn from_columns(y: Vec<f64>, columns: Vec<(String, Vec<f64>)>, intercept: bool) -> Result<Self> {
        let n = y.len();
        let mut names = Vec::new();
        let mut data: Vec<f64> = Vec::new();
        if intercept {
            names.push("intercept".to_string());
            data.extend(std::iter::repeat_n(1.0, n));
        }
        for (name, col) in columns {
            if col.len() != n {
                return Err(Error::Dimension {
                    location: format!("column {name}"),
                    expected: n,
                    found: col.len(),
                });
            }
            names.push(name);
            data.extend(col);
        }
        let x = DMatrix::from_column_slice(n, names.len(), &data);
        DesignMatrix::new(names, x, DVector::from_vec(y))
    }

    pub fn with_weights(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() != self.y.len() || w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be finite, non-negative, one per row".into()));
        }
        self.weights = Some(DVector::from_vec(w));
        Ok(self)
    }

    pub fn nrows(&self) -> usize {
        self.y.len()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    /// Appends one dummy per label level except the first in sorted order.
    pub fn add_fixed_effects(&mut self, prefix: &str, labels: &[String]) -> Result<()> {
        if labels.len() != self.nrows() {
            return Err(Error::Dimension {
                location: format!("fixed effect {prefix}"),
                expected: self.nrows(),
                found: labels.len(),
            });
        }
        let levels: BTreeSet<&String> = labels.iter().collect();
        for level in levels.into_iter().skip(1) {
            let col: Vec<f64> = labels.iter().map(|l| (l == level) as u8 as f64).collect();
            let name = format!("{prefix}={level}");
            if self.column(&name).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate column {name}")));
            }
            self.x = self.x.clone().insert_column(self.x.ncols(), 0.0);
            let last = self.x.ncols() - 1;
            self.x.set_column(last, &DVector::from_vec(col));
            self.names.push(name);
        }
        Ok(())
    }

    /// Subtracts group means from the outcome and every non-intercept
    /// column, then drops the intercept. Only meaningful for the identity
    /// family; standard errors do not correct for the absorbed groups.
    pub fn within_transform(&mut self, labels: &[String]) -> Result<()> {
        if labels.len() != self.nrows() {
            return Err(Error::InvalidArgument("group labels must match rows".into()));
        }
        let mut groups: std::collections::BTreeMap<&String, Vec<usize>> = Default::default();
        for (i, l) in labels.iter().enumerate() {
            groups.entry(l).or_default().push(i);
        }
        let demean = |v: &mut [f64]| {
            for rows in groups.values() {
                let m = rows.iter().map(|&i| v[i]).sum::<f64>() / rows.len() as f64;
                for &i in rows {
                    v[i] -= m;
                }
            }
        };
        demean(self.y.as_mut_slice());
        for c in 0..self.x.ncols() {
            let mut col: Vec<f64> = self.x.column(c).iter().copied().collect();
            demean(&mut col);
            self.x.set_column(c, &DVector::from_vec(col));
        }
        if let Some(i) = self.column("intercept") {
            self.x = self.x.clone().remove_column(i);
            self.names.remove(i);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlmOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// A fitted linear predictor beyond this magnitude in a logit family
    /// marks the fit as separated.
    pub separation_eta: f64,
}

impl Default for GlmOptions {
    fn default() -> Self {
        GlmOptions {
            tol: 1e-8,
            max_iter: 100,
            separation_eta: 25.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmFit {
    pub family: Family,
    /// Names of the estimated coefficients, after collinear columns are dropped.
    pub names: Vec<String>,
    /// Design column index of each estimated coefficient.
    pub columns: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub se_classical: Vec<f64>,
    pub se_robust: Vec<f64>,
    pub dropped: Vec<String>,
    pub loglik: f64,
    pub null_loglik: Option<f64>,
    /// McFadden for likelihood families, R² for identity.
    pub pseudo_r2: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub separation: bool,
    pub n: usize,
}

impl GlmFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }

    pub fn linear_predictor(&self, design: &DesignMatrix, row: usize) -> f64 {
        self.columns
            .iter()
            .zip(&self.coefficients)
            .map(|(&c, b)| design.x[(row, c)] * b)
            .sum()
    }

    pub fn predict(&self, design: &DesignMatrix) -> Vec<f64> {
        (0..design.nrows())
            .map(|i| self.family.mean(self.linear_predictor(design, i)))
            .collect()
    }
}

/// Columns kept after sequential Gram-Schmidt: a column nearly in the span
/// of the earlier kept ones is dropped.
fn independent_columns(x: &DMatrix<f64>) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept = Vec::new();
    for c in 0..x.ncols() {
        let col = x.column(c).into_owned();
        let norm = col.norm();
        if norm == 0.0 {
            continue;
        }
        let mut r = col.clone();
        for q in &basis {
            let d = q.dot(&r);
            r -= q * d;
        }
        let rn = r.norm();
        if rn > 1e-9 * norm {
            basis.push(r / rn);
            kept.push(c);
        }
    }
    kept
}

fn select(design: &DesignMatrix, cols: &[usize]) -> DMatrix<f64> {
    design.x.select_columns(cols)
}

/// Log-likelihood at `beta` over all design columns.
pub fn log_likelihood(design: &DesignMatrix, family: Family, beta: &[f64]) -> f64 {
    let eta = &design.x * DVector::from_column_slice(beta);
    (0..design.nrows())
        .map(|i| design.weight(i) * family.loglik_obs(design.y[i], eta[i]))
        .sum()
}

/// Gradient of [`log_likelihood`]: `X' w (y - mu)`.
pub fn score(design: &DesignMatrix, family: Family, beta: &[f64]) -> Vec<f64> {
    let eta = &design.x * DVector::from_column_slice(beta);
    let resid = DVector::from_iterator(
        design.nrows(),
        (0..design.nrows()).map(|i| design.weight(i) * (design.y[i] - family.mean(eta[i]))),
    );
    (design.x.transpose() * resid).iter().copied().collect()
}

fn null_loglik(design: &DesignMatrix, family: Family) -> Option<f64> {
    let sw: f64 = (0..design.nrows()).map(|i| design.weight(i)).sum();
    let mu = (0..design.nrows()).map(|i| design.weight(i) * design.y[i]).sum::<f64>() / sw;
    let ok = match family {
        Family::Logit | Family::FractionalLogit => mu > 0.0 && mu < 1.0,
        Family::Poisson => mu > 0.0,
        Family::Identity => true,
    };
    ok.then(|| {
        let eta = family.link(mu);
        (0..design.nrows())
            .map(|i| design.weight(i) * family.loglik_obs(design.y[i], eta))
            .sum()
    })
}

/// Fits by iteratively reweighted least squares.
pub fn fit_glm(design: &DesignMatrix, family: Family, opts: &GlmOptions) -> Result<GlmFit> {
    let n = design.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("no observations".into()));
    }
    if let Some(bad) = design.y.iter().find(|&&y| !family.check_outcome(y)) {
        return Err(Error::InvalidArgument(format!(
            "outcome {bad} outside the {} family domain",
            family.as_str()
        )));
    }
    let cols = independent_columns(&design.x);
    let dropped = (0..design.names.len())
        .filter(|c| !cols.contains(c))
        .map(|c| design.names[c].clone())
        .collect();
    let x = select(design, &cols);
    let p = cols.len();
    let w: Vec<f64> = (0..n).map(|i| design.weight(i)).collect();
    let y = &design.y;
    let ll = |beta: &DVector<f64>| -> f64 {
        let eta = &x * beta;
        (0..n).map(|i| w[i] * family.loglik_obs(y[i], eta[i])).sum()
    };
    let wls = |wt: &[f64], z: &DVector<f64>| -> Result<DVector<f64>> {
        let mut xtwx = DMatrix::zeros(p, p);
        let mut xtwz = DVector::zeros(p);
        for i in 0..n {
            let row = x.row(i);
            for a in 0..p {
                let xa = row[a] * wt[i];
                xtwz[a] += xa * z[i];
                for b in a..p {
                    xtwx[(a, b)] += xa * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                xtwx[(a, b)] = xtwx[(b, a)];
            }
        }
        let chol = xtwx
            .cholesky()
            .ok_or_else(|| Error::InvalidArgument("weighted design is not positive definite".into()))?;
        Ok(chol.solve(&xtwz))
    };

    // Starting values from a least-squares fit to the linked, shrunk outcome.
    let start_mu = |yi: f64| match family {
        Family::Logit | Family::FractionalLogit => (yi + 0.5) / 2.0,
        Family::Poisson => yi + 0.1,
        Family::Identity => yi,
    };
    let z0 = DVector::from_iterator(n, y.iter().map(|&yi| family.link(start_mu(yi))));
    let mut beta = wls(&w, &z0)?;
    let mut iterations = 1;
    let mut converged = family == Family::Identity;
    if !converged {
        let mut current = ll(&beta);
        while iterations < opts.max_iter {
            let eta = &x * &beta;
            let mu: Vec<f64> = eta.iter().map(|&e| family.mean(e)).collect();
            let grad = x.transpose() * DVector::from_iterator(n, (0..n).map(|i| w[i] * (y[i] - mu[i])));
            let small = grad.amax() <= opts.tol;
            let var: Vec<f64> = mu.iter().map(|&m| family.variance(m).max(1e-12)).collect();
            let wt: Vec<f64> = (0..n).map(|i| w[i] * var[i]).collect();
            let z = DVector::from_iterator(n, (0..n).map(|i| eta[i] + (y[i] - mu[i]) / var[i]));
            let mut next = wls(&wt, &z)?;
            let mut next_ll = ll(&next);
            let mut halvings = 0;
            while !(next_ll >= current - 1e-12 * current.abs()) && halvings < 30 {
                next = (&beta + &next) * 0.5;
                next_ll = ll(&next);
                halvings += 1;
            }
            iterations += 1;
            let moved = (&next - &beta).amax();
            beta = next;
            current = next_ll;
            // Once the score is within tolerance the step just taken is a
            // final polish; Newton converges quadratically from here.
            if small {
                converged = true;
                break;
            }
            if moved == 0.0 {
                break;
            }
        }
        if !converged {
            let eta = &x * &beta;
            let grad = x.transpose()
                * DVector::from_iterator(n, (0..n).map(|i| w[i] * (y[i] - family.mean(eta[i]))));
            converged = grad.amax() <= opts.tol;
        }
    }

    let eta = &x * &beta;
    let mu: Vec<f64> = eta.iter().map(|&e| family.mean(e)).collect();
    let mut bread = DMatrix::zeros(p, p);
    let mut meat = DMatrix::zeros(p, p);
    let mut rss = 0.0;
    for i in 0..n {
        let row = x.row(i).transpose();
        let v = family.variance(mu[i]);
        bread += &row * row.transpose() * (w[i] * v);
        let s = w[i] * (y[i] - mu[i]);
        meat += &row * row.transpose() * (s * s);
        rss += w[i] * (y[i] - mu[i]).powi(2);
    }
    let bread_inv = bread
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("information matrix is singular".into()))?;
    let df = n.saturating_sub(p).max(1) as f64;
    let phi = if family == Family::Identity { rss / df } else { 1.0 };
    let robust = &bread_inv * meat * &bread_inv * (n as f64 / df);
    let se_classical = (0..p).map(|k| (bread_inv[(k, k)] * phi).sqrt()).collect();
    let se_robust = (0..p).map(|k| robust[(k, k)].sqrt()).collect();

    let (loglik, null_ll, pseudo_r2) = if family.has_likelihood_r2() {
        let l = ll(&beta);
        let l0 = null_loglik(design, family);
        let r2 = l0.filter(|&v| v != 0.0).map(|v| 1.0 - l / v);
        (l, l0, r2)
    } else {
        let sw: f64 = w.iter().sum();
        let sigma2 = rss / sw;
        let l = -0.5 * sw * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
        let ybar = (0..n).map(|i| w[i] * y[i]).sum::<f64>() / sw;
        let tss: f64 = (0..n).map(|i| w[i] * (y[i] - ybar).powi(2)).sum();
        (l, None, (tss > 0.0).then(|| 1.0 - rss / tss))
    };
    let separation = matches!(family, Family::Logit | Family::FractionalLogit)
        && eta.iter().any(|e| e.abs() > opts.separation_eta);

    Ok(GlmFit {
        family,
        names: cols.iter().map(|&c| design.names[c].clone()).collect(),
        columns: cols,
        coefficients: beta.iter().copied().collect(),
        se_classical,
        se_robust,
        dropped,
        loglik,
        null_loglik: null_ll,
        pseudo_r2,
        converged,
        iterations,
        separation,
        n,
    })
}

/// Mean change in the predicted outcome when `var` rises by `delta` for
/// every observation, as a fraction (multiply by 100 for points).
pub fn average_marginal_effect(fit: &GlmFit, design: &DesignMatrix, var: &str, delta: f64) -> Result<f64> {
    let col = design.column(var).ok_or_else(|| Error::UnknownColumn(var.to_string()))?;
    let beta = match fit.columns.iter().position(|&c| c == col) {
        Some(k) => fit.coefficients[k],
        None => return Ok(0.0),
    };
    if fit.family == Family::Identity {
        // The mean is linear, so every observation moves by the same amount.
        return Ok(beta * delta);
    }
    let n = design.nrows();
    let total: f64 = (0..n)
        .map(|i| {
            let eta = fit.linear_predictor(design, i);
            fit.family.mean(eta + beta * delta) - fit.family.mean(eta)
        })
        .sum();
    Ok(total / n as f64)
}
