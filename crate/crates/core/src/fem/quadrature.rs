//! Gauss–Legendre and Gauss–Lobatto–Legendre point sets on `[-1, 1]`.

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        0.5 * (n * (n + 1)) as f64 * x.powi(n as i32 + 1)
    } else {
        n as f64 * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule, exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    QuadratureRule { nodes, weights }
}

/// The `p + 1` Gauss–Lobatto–Legendre points (endpoints and the roots of
/// `P_p'`), ascending.
pub fn gauss_lobatto_nodes(p: usize) -> Vec<f64> {
    assert!(p >= 1);
    let mut x: Vec<f64> = (0..=p)
        .map(|i| -(std::f64::consts::PI * i as f64 / p as f64).cos())
        .collect();
    // Newton on (1 - x^2) P_p'(x) using P_{p-1} and P_p
    for xi in x.iter_mut().take(p).skip(1) {
        for _ in 0..100 {
            let (pp, _) = legendre(p, *xi);
            let (pm, _) = legendre(p - 1, *xi);
            let dx = (*xi * pp - pm) / ((p + 1) as f64 * pp);
            *xi -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
    }
    x[0] = -1.0;
    x[p] = 1.0;
    x
}

/// Nodal Lagrange basis on the given points.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    pub nodes: Vec<f64>,
    denom: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(nodes: Vec<f64>) -> Self {
        let denom = (0..nodes.len())
            .map(|i| {
                (0..nodes.len())
                    .filter(|&j| j != i)
                    .map(|j| nodes[i] - nodes[j])
                    .product()
            })
            .collect();
        Self { nodes, denom }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn values(&self, x: f64) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| x - self.nodes[j])
                    .product::<f64>()
                    / self.denom[i]
            })
            .collect()
    }

    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for k in (0..n).filter(|&k| k != i) {
                    s += (0..n)
                        .filter(|&j| j != i && j != k)
                        .map(|j| x - self.nodes[j])
                        .product::<f64>();
                }
                s / self.denom[i]
            })
            .collect()
    }
}
