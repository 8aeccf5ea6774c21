//! Explicit L1 scheme for `cD_t^α u = u_xx + A u^p u_x`, `0 < α ≤ 1`.
//!
//! ```text
//! u^{n+1} = u^n - Σ_{k=1}^{n} b_k (u^{n+1-k} - u^{n-k}) + Γ(2-α) Δt^α F(u^n)
//! F(u)_i  = (u_{i+1} - 2u_i + u_{i-1})/Δx² + A u_i^p (u_{i+1} - u_{i-1})/(2Δx)
//! ```

use std::f64::consts::PI;

use crate::fracops::gamma;
use crate::vimcore::{ProblemSpec, Regime};

use super::{Boundary, GridField, GridSpec, OracleError};

/// `b_k = (k+1)^(1-α) - k^(1-α)` for `k < n`.
pub fn l1_weights(alpha: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| l1_weight(alpha, k)).collect()
}

fn l1_weight(alpha: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let beta = 1.0 - alpha;
    if beta == 0.0 {
        return 0.0;
    }
    let k = k as f64;
    // k^β ((1 + 1/k)^β - 1) without the cancellation of the direct form
    k.powf(beta) * (beta * (1.0 / k).ln_1p()).exp_m1()
}

/// `Σ_k (-1)^k b_k`, the damping available to the highest grid mode.
pub fn alternating_weight_sum(alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    // partial sums of a slowly convergent alternating series, accelerated
    // by repeated averaging of the tail partial sums
    const TERMS: usize = 4096;
    const LEVELS: usize = 40;
    let mut partial = Vec::with_capacity(TERMS);
    let mut acc = 0.0;
    for k in 0..TERMS {
        let b = l1_weight(alpha, k);
        acc += if k % 2 == 0 { b } else { -b };
        partial.push(acc);
    }
    let mut level: Vec<f64> = partial[TERMS - LEVELS - 1..].to_vec();
    for _ in 0..LEVELS {
        level = level.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    level[0]
}

/// Both stability measures of a step; each must be at most 1.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Stability {
    pub dt: f64,
    pub dx: f64,
    /// `Δt^α/Γ(2-α) · 2/Δx²`.
    pub criterion_ratio: f64,
    /// `4 Γ(2-α) Δt^α/Δx²` over its von Neumann threshold
    /// `2 Σ(-1)^k b_k`.
    pub von_neumann_ratio: f64,
}

impl Stability {
    pub fn of(alpha: f64, dt: f64, dx: f64) -> Stability {
        let g = gamma(2.0 - alpha).expect("2 - alpha > 0");
        let dta = dt.powf(alpha);
        Stability {
            dt,
            dx,
            criterion_ratio: dta / g * 2.0 / (dx * dx),
            von_neumann_ratio: 4.0 * g * dta / (dx * dx) / (2.0 * alternating_weight_sum(alpha)),
        }
    }

    pub fn ratio(&self) -> f64 {
        self.criterion_ratio.max(self.von_neumann_ratio)
    }

    pub fn is_stable(&self) -> bool {
        self.ratio() <= 1.0
    }
}

/// Largest `Δt` passing both checks for the given `Δx`.
pub fn max_stable_dt(alpha: f64, dx: f64) -> f64 {
    let g = gamma(2.0 - alpha).expect("2 - alpha > 0");
    let by_criterion = g * dx * dx / 2.0;
    let by_von_neumann = 2.0 * alternating_weight_sum(alpha) * dx * dx / (4.0 * g);
    by_criterion.min(by_von_neumann).powf(1.0 / alpha)
}

/// How the L1 history sum is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Memory {
    /// Full sum over all past increments, `O(n)` per step.
    Exact,
    /// Weights beyond a short exact window replaced by a sum of decaying
    /// exponentials, `O(1)` per step; `tol` bounds their relative error.
    SumOfExponentials { tol: f64 },
    /// Exact for short runs, sum-of-exponentials with `tol = 1e-10`
    /// beyond [`AUTO_EXACT_STEPS`] steps.
    Auto,
}

pub const AUTO_EXACT_STEPS: usize = 4000;
/// History weights `b_1 .. b_{WINDOW-1}` are always applied exactly.
const WINDOW: usize = 16;

/// Internal time steps per output interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Substeps {
    Fixed {
        n: usize,
    },
    /// Fewest substeps keeping `Δt` at or below `fraction` of
    /// [`max_stable_dt`].
    StabilityFraction {
        fraction: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FdOptions {
    pub substeps: Substeps,
    pub memory: Memory,
    /// Refuse runs needing more internal steps than this.
    pub max_steps: usize,
}

pub const DEFAULT_MAX_STEPS: usize = 50_000_000;

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions { substeps: Substeps::Fixed { n: 1 }, memory: Memory::Auto, max_steps: DEFAULT_MAX_STEPS }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FdReport {
    pub steps: usize,
    pub substeps: usize,
    pub stability: Stability,
    pub memory: Memory,
    pub soe_nodes: usize,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub field: GridField,
    pub report: FdReport,
}

/// Solves on `grid` with one internal step per grid interval.
pub fn solve_fd(spec: &ProblemSpec, grid: &GridSpec) -> Result<GridField, OracleError> {
    Ok(solve_fd_with(spec, grid, &FdOptions::default())?.field)
}

/// Exponential-sum fit `b_k ≈ Σ_l c_l r_l^k` for `WINDOW ≤ k ≤ horizon`.
#[derive(Debug, Clone)]
struct SoeKernel {
    decay: Vec<f64>,
    weight: Vec<f64>,
}

impl SoeKernel {
    fn new(alpha: f64, horizon: usize, tol: f64) -> SoeKernel {
        // s^-α = 1/Γ(α) ∫ exp(αy - s e^y) dy, trapezoidal in y; integrating
        // over s in [k, k+1] gives the weight of each node
        let beta = 1.0 - alpha;
        let ln_tol = tol.ln();
        let h = PI * PI / (3.0 - ln_tol);
        let y_min = (ln_tol + gamma(1.0 + alpha).unwrap().ln()) / alpha - (horizon as f64 + 1.0).ln() - 1.0;
        let y_max = ((5.0 - ln_tol) / WINDOW as f64).ln();
        let count = ((y_max - y_min) / h).ceil() as usize + 1;
        let g = gamma(alpha).unwrap();
        let mut decay = Vec::with_capacity(count);
        let mut weight = Vec::with_capacity(count);
        for l in 0..count {
            let y = y_min + l as f64 * h;
            let lambda = y.exp();
            let w = h * (alpha * y).exp() / g;
            decay.push((-lambda).exp());
            weight.push(beta * w * (-(-lambda).exp_m1()) / lambda);
        }
        SoeKernel { decay, weight }
    }

    #[cfg(test)]
    fn approx(&self, k: usize) -> f64 {
        self.decay.iter().zip(&self.weight).map(|(r, c)| c * r.powi(k as i32)).sum()
    }
}

enum History {
    Exact {
        increments: Vec<Vec<f64>>,
        weights: Vec<f64>,
        alpha: f64,
    },
    Soe {
        window: Vec<Vec<f64>>,
        weights: Vec<f64>,
        kernel: SoeKernel,
        // per node, Σ_k c_l r_l^k d^{n+1-k} over the far history
        state: Vec<Vec<f64>>,
        entry: Vec<f64>,
        pushed: usize,
    },
    None,
}

impl History {
    /// `Σ_{k≥1} b_k d^{n+1-k}` into `out`.
    fn sum(&self, out: &mut [f64]) {
        out.fill(0.0);
        match self {
            History::None => {}
            History::Exact { increments, weights, .. } => {
                for (k, d) in increments.iter().rev().enumerate() {
                    let b = weights[k + 1];
                    for (o, v) in out.iter_mut().zip(d) {
                        *o += b * v;
                    }
                }
            }
            History::Soe { window, weights, state, pushed, .. } => {
                let near = (*pushed).min(WINDOW - 1);
                for k in 1..=near {
                    let d = &window[(pushed - k) % WINDOW];
                    let b = weights[k];
                    for (o, v) in out.iter_mut().zip(d) {
                        *o += b * v;
                    }
                }
                for node in state {
                    for (o, v) in out.iter_mut().zip(node) {
                        *o += v;
                    }
                }
            }
        }
    }

    fn push(&mut self, d: Vec<f64>) {
        match self {
            History::None => {}
            History::Exact { increments, weights, alpha } => {
                increments.push(d);
                let n = increments.len();
                let have = weights.len();
                if have <= n {
                    weights.extend((have..=n).map(|k| l1_weight(*alpha, k)));
                }
            }
            History::Soe { window, kernel, state, entry, pushed, .. } => {
                // the increment that now sits WINDOW-1 steps back moves to
                // the far part: P_l <- r_l P_l + c_l r_l^WINDOW d
                let leaving =
                    if *pushed + 1 >= WINDOW { Some((*pushed + 1 - WINDOW) % WINDOW) } else { None };
                for (l, node) in state.iter_mut().enumerate() {
                    let r = kernel.decay[l];
                    match leaving {
                        Some(slot) => {
                            let c = entry[l];
                            for (p, v) in node.iter_mut().zip(&window[slot]) {
                                *p = r * *p + c * v;
                            }
                        }
                        None => node.iter_mut().for_each(|p| *p *= r),
                    }
                }
                let slot = *pushed % WINDOW;
                window[slot] = d;
                *pushed += 1;
            }
        }
    }
}

/// Solves with explicit control over substeps and memory evaluation.
pub fn solve_fd_with(
    spec: &ProblemSpec,
    grid: &GridSpec,
    options: &FdOptions,
) -> Result<FdSolution, OracleError> {
    grid.validate()?;
    if spec.regime() != Regime::Subdiffusive {
        return Err(OracleError::Unsupported {
            reason: format!("finite-difference oracle covers 0 < alpha <= 1, got {}", spec.alpha()),
        });
    }
    let alpha = spec.alpha();
    let dx = grid.dx();
    let substeps = match options.substeps {
        Substeps::Fixed { n } if n >= 1 => n,
        Substeps::Fixed { .. } => {
            return Err(OracleError::InvalidGrid { reason: "substeps must be at least 1".into() })
        }
        Substeps::StabilityFraction { fraction } => {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(OracleError::InvalidGrid {
                    reason: format!("stability fraction {fraction} outside (0, 1]"),
                });
            }
            let target = fraction * max_stable_dt(alpha, dx);
            let n = (grid.dt() / target).ceil().max(1.0);
            if n * (grid.nt - 1) as f64 > options.max_steps as f64 {
                return Err(OracleError::TooManySteps {
                    steps: n * (grid.nt - 1) as f64,
                    max: options.max_steps,
                });
            }
            n as usize
        }
    };
    let dt = grid.dt() / substeps as f64;
    let stability = Stability::of(alpha, dt, dx);
    if !stability.is_stable() {
        return Err(OracleError::Unstable { stability });
    }
    let steps = (grid.nt - 1) * substeps;
    if steps > options.max_steps {
        return Err(OracleError::TooManySteps { steps: steps as f64, max: options.max_steps });
    }
    let memory = match options.memory {
        Memory::Auto if alpha < 1.0 && steps > AUTO_EXACT_STEPS => Memory::SumOfExponentials { tol: 1e-10 },
        Memory::Auto => Memory::Exact,
        m => m,
    };

    let nx = grid.nx;
    let xs = grid.xs();
    let g = spec.g();
    let mut u: Vec<f64> = xs.iter().map(|&x| g.evaluate(x)).collect::<Result<_, _>>()?;
    if grid.boundary == Boundary::Periodic {
        u[nx - 1] = u[0];
    }
    let left = u[0];
    let right = u[nx - 1];

    let weights = l1_weights(alpha, WINDOW.max(2));
    let mut soe_nodes = 0;
    let mut history = if alpha == 1.0 {
        History::None
    } else {
        match memory {
            Memory::SumOfExponentials { tol } => {
                let kernel = SoeKernel::new(alpha, steps.max(WINDOW), tol);
                soe_nodes = kernel.decay.len();
                let entry = kernel
                    .decay
                    .iter()
                    .zip(&kernel.weight)
                    .map(|(r, c)| c * r.powi(WINDOW as i32))
                    .collect::<Vec<_>>();
                History::Soe {
                    window: vec![Vec::new(); WINDOW],
                    weights: weights.clone(),
                    state: vec![vec![0.0; nx]; kernel.decay.len()],
                    kernel,
                    entry,
                    pushed: 0,
                }
            }
            _ => History::Exact { increments: Vec::new(), weights: weights.clone(), alpha },
        }
    };

    let scale = gamma(2.0 - alpha)? * dt.powf(alpha);
    let a = spec.a();
    let p = spec.p();
    let integer_p = (p.fract() == 0.0 && p <= i32::MAX as f64).then_some(p as i32);
    let inv_dx2 = 1.0 / (dx * dx);
    let inv_2dx = 0.5 / dx;

    let mut values = Vec::with_capacity(nx * grid.nt);
    values.extend_from_slice(&u);
    let mut mem = vec![0.0; nx];
    let mut next = vec![0.0; nx];
    for step in 1..=steps {
        history.sum(&mut mem);
        let periodic = grid.boundary == Boundary::Periodic;
        for i in 0..nx - 1 {
            if !periodic && i == 0 {
                continue;
            }
            let (um, up) = if periodic {
                let m = if i == 0 { nx - 2 } else { i - 1 };
                (u[m], u[i + 1])
            } else {
                (u[i - 1], u[i + 1])
            };
            let ui = u[i];
            let power = match integer_p {
                Some(k) => ui.powi(k),
                None => ui.powf(p),
            };
            let f = (up - 2.0 * ui + um) * inv_dx2 + a * power * (up - um) * inv_2dx;
            next[i] = ui - mem[i] + scale * f;
        }
        if periodic {
            next[nx - 1] = next[0];
        } else {
            next[0] = left;
            next[nx - 1] = right;
        }
        if let Some(i) = next.iter().position(|v| !v.is_finite()) {
            return Err(OracleError::Diverged { step, t: step as f64 * dt, x: xs[i] });
        }
        let d: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        history.push(d);
        std::mem::swap(&mut u, &mut next);
        if step % substeps == 0 {
            values.extend_from_slice(&u);
        }
    }
    let field = GridField::from_rows(grid.clone(), values)?;
    Ok(FdSolution {
        field,
        report: FdReport { steps, substeps, stability, memory, soe_nodes, boundary: grid.boundary },
    })
}

#[cfg(test)]
fn sample(g: &crate::expr::Expr, xs: &[f64]) -> Result<Vec<f64>, OracleError> {
    Ok(xs.iter().map(|&x| g.evaluate(x)).collect::<Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::fracops::mittag_leffler;

    fn spec(alpha: f64, a: f64, g: &str) -> ProblemSpec {
        ProblemSpec::new(alpha, a, 1.0, parse(g).unwrap(), None).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(l1_weights(1.0, 4), vec![1.0, 0.0, 0.0, 0.0]);
        let w = l1_weights(0.5, 3);
        for (got, want) in w.iter().zip([1.0, 0.41421356237309505, 0.31783724519578224]) {
            assert!((got - want).abs() < 1e-15);
        }
        let w = l1_weights(0.3, 50);
        assert!(w.windows(2).all(|p| p[1] < p[0] && p[1] > 0.0));
    }

    #[test]
    fn alternating_sum_matches_reference() {
        // 2 η(α-1), mpmath
        for (alpha, want) in
            [(0.2, 0.60559319810259623), (0.5, 0.76020962521936803), (0.8, 0.90731176408823215), (1.0, 1.0)]
        {
            assert!((alternating_weight_sum(alpha) - want).abs() < 1e-9, "{alpha}");
        }
    }

    #[test]
    fn stated_stability_check_is_not_sufficient_for_small_alpha() {
        // at α = 0.2 the stated check admits steps that amplify the sawtooth
        let alpha = 0.2;
        let dx = 0.05;
        let g = gamma(2.0 - alpha).unwrap();
        let dt = (g * dx * dx / 2.0).powf(1.0 / alpha);
        let s = Stability::of(alpha, dt, dx);
        assert!((s.criterion_ratio - 1.0).abs() < 1e-12);
        assert!(s.von_neumann_ratio > 1.3);
        assert!(!s.is_stable());
        assert!(Stability::of(alpha, max_stable_dt(alpha, dx), dx).ratio() <= 1.0 + 1e-12);
    }

    #[test]
    fn soe_kernel_tracks_weights() {
        for alpha in [0.2, 0.5, 0.8, 0.95] {
            let kernel = SoeKernel::new(alpha, 100_000, 1e-10);
            for k in [WINDOW, 17, 100, 1000, 31_623, 100_000] {
                let exact = l1_weight(alpha, k);
                let approx = kernel.approx(k);
                assert!(((approx - exact) / exact).abs() < 1e-8, "alpha {alpha} k {k}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn first_row_is_initial_profile() {
        let s = spec(0.6, -1.0, "sin(pi*x) + x/3");
        let grid = GridSpec::new(0.0, 1.0, 21, 0.01, 6, Boundary::Dirichlet).unwrap();
        let opts = FdOptions {
            substeps: Substeps::StabilityFraction { fraction: 0.5 },
            memory: Memory::Exact,
            ..FdOptions::default()
        };
        let sol = solve_fd_with(&s, &grid, &opts).unwrap();
        let g = sample(s.g(), &grid.xs()).unwrap();
        assert_eq!(sol.field.row(0), &g[..]);
    }

    #[test]
    fn unstable_steps_are_refused() {
        let s = spec(0.5, 0.0, "sin(pi*x)");
        let grid = GridSpec::new(0.0, 1.0, 51, 1.0, 3, Boundary::Dirichlet).unwrap();
        assert!(matches!(solve_fd(&s, &grid), Err(OracleError::Unstable { .. })));
        let s2 = ProblemSpec::new(1.5, 0.0, 1.0, parse("x").unwrap(), Some(parse("0").unwrap())).unwrap();
        assert!(matches!(solve_fd(&s2, &grid), Err(OracleError::Unsupported { .. })));
    }

    #[test]
    fn heat_equation_matches_exact_solution() {
        let s = spec(1.0, 0.0, "sin(pi*x)");
        let grid = GridSpec::new(0.0, 1.0, 41, 0.05, 11, Boundary::Dirichlet).unwrap();
        let opts = FdOptions {
            substeps: Substeps::StabilityFraction { fraction: 0.5 },
            memory: Memory::Auto,
            ..FdOptions::default()
        };
        let sol = solve_fd_with(&s, &grid, &opts).unwrap();
        let mut worst: f64 = 0.0;
        for (j, t) in grid.ts().iter().enumerate() {
            for (i, x) in grid.xs().iter().enumerate() {
                let exact = (-PI * PI * t).exp() * (PI * x).sin();
                worst = worst.max((sol.field.at(i, j) - exact).abs());
            }
        }
        assert!(worst <= 5e-3, "{worst}");
    }

    #[test]
    fn fractional_heat_matches_mittag_leffler() {
        let alpha = 0.5;
        let s = spec(alpha, 0.0, "sin(pi*x)");
        let grid = GridSpec::new(0.0, 1.0, 21, 0.1, 11, Boundary::Dirichlet).unwrap();
        let opts = FdOptions {
            substeps: Substeps::StabilityFraction { fraction: 0.5 },
            memory: Memory::Auto,
            ..FdOptions::default()
        };
        let sol = solve_fd_with(&s, &grid, &opts).unwrap();
        let mut worst: f64 = 0.0;
        for (j, t) in grid.ts().iter().enumerate() {
            let ml = mittag_leffler(alpha, -PI * PI * t.powf(alpha), 80).unwrap().value;
            for (i, x) in grid.xs().iter().enumerate() {
                worst = worst.max((sol.field.at(i, j) - (PI * x).sin() * ml).abs());
            }
        }
        assert!(worst <= 5e-3, "{worst}");
    }

    #[test]
    fn sum_of_exponentials_matches_exact_memory() {
        let s = spec(0.8, -1.0, "sin(pi*x)");
        let grid = GridSpec::new(0.0, 1.0, 21, 0.08, 5, Boundary::Dirichlet).unwrap();
        let sub = Substeps::StabilityFraction { fraction: 0.5 };
        let exact = solve_fd_with(
            &s,
            &grid,
            &FdOptions { substeps: sub, memory: Memory::Exact, ..FdOptions::default() },
        )
        .unwrap();
        let soe = solve_fd_with(
            &s,
            &grid,
            &FdOptions {
                substeps: sub,
                memory: Memory::SumOfExponentials { tol: 1e-10 },
                ..FdOptions::default()
            },
        )
        .unwrap();
        assert!(exact.report.steps > 500, "{}", exact.report.steps);
        let diff = exact
            .field
            .values()
            .iter()
            .zip(soe.field.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn periodic_boundary_keeps_endpoints_equal() {
        let s = spec(0.7, -1.0, "sin(2*pi*x)");
        let grid = GridSpec::new(0.0, 1.0, 33, 0.01, 5, Boundary::Periodic).unwrap();
        let opts = FdOptions {
            substeps: Substeps::StabilityFraction { fraction: 0.5 },
            memory: Memory::Auto,
            ..FdOptions::default()
        };
        let sol = solve_fd_with(&s, &grid, &opts).unwrap();
        for j in 0..grid.nt {
            assert_eq!(sol.field.at(0, j), sol.field.at(32, j));
        }
    }
}
