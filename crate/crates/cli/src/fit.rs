use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Model {
    N,
    NLogN,
    N2,
    N3,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::N, Model::NLogN, Model::N2, Model::N3];

    pub fn eval(self, n: f64) -> f64 {
        match self {
            Model::N => n,
            Model::NLogN => n * n.log2(),
            Model::N2 => n * n,
            Model::N3 => n * n * n,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::N => "n",
            Model::NLogN => "n log n",
            Model::N2 => "n^2",
            Model::N3 => "n^3",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelFit {
    pub model: &'static str,
    /// Least-squares constant c in log y = log c + log f(n).
    pub constant: f64,
    /// Mean squared residual in log space.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fit {
    pub best: &'static str,
    pub models: Vec<ModelFit>,
    /// Free log-log slope, for reference.
    pub exponent: f64,
}

/// Fit y ≈ c·f(n) for each candidate model on log-transformed data and keep
/// the one with the smallest residual. Needs at least four points.
pub fn fit(points: &[(f64, f64)]) -> Option<Fit> {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(n, y)| n > 1.0 && y > 0.0).collect();
    if pts.len() < 4 {
        return None;
    }
    let mut models = Vec::new();
    for m in Model::ALL {
        let logs: Vec<f64> = pts.iter().map(|&(n, y)| y.ln() - m.eval(n).ln()).collect();
        let c = logs.iter().sum::<f64>() / logs.len() as f64;
        let residual = logs.iter().map(|l| (l - c).powi(2)).sum::<f64>() / logs.len() as f64;
        models.push(ModelFit { model: m.name(), constant: c.exp(), residual });
    }
    let best = models.iter().min_by(|a, b| a.residual.total_cmp(&b.residual)).unwrap().model;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(Fit { best, models, exponent: sxy / sxx })
}

/// Growth per doubling of n implied by the two largest sizes:
/// (y2/y1)^(ln 2 / ln(n2/n1)). Equals y2/y1 when n2 = 2·n1.
pub fn doubling_ratio(points: &[(f64, f64)]) -> Option<f64> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let [.., (n1, y1), (n2, y2)] = pts[..] else { return None };
    if n1 <= 0.0 || y1 <= 0.0 || n2 <= n1 {
        return None;
    }
    Some((y2 / y1).powf(2f64.ln() / (n2 / n1).ln()))
}
