//! Random polynomial systems with exact derivatives, used as an oracle
//! that does not go through the symbolic machinery under test.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Poly {
    /// (coefficient, exponent per variable)
    pub terms: Vec<(f64, Vec<u32>)>,
}

fn powu(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, _| acc * x)
}

impl Poly {
    pub fn random(rng: &mut ChaCha8Rng, n: usize, max_degree: u32, terms: usize, coef: f64) -> Poly {
        let mut out: Vec<(f64, Vec<u32>)> = Vec::new();
        while out.len() < terms {
            let degree = rng.gen_range(0..=max_degree);
            let mut exps = vec![0u32; n];
            for _ in 0..degree {
                exps[rng.gen_range(0..n)] += 1;
            }
            if out.iter().any(|(_, e)| *e == exps) {
                continue;
            }
            out.push((rng.gen_range(-coef..=coef), exps));
        }
        Poly { terms: out }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * e.iter().zip(x).map(|(k, v)| powu(*v, *k)).product::<f64>())
            .sum()
    }

    fn derivative(&self, j: usize) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(_, e)| e[j] > 0)
                .map(|(c, e)| {
                    let mut e2 = e.clone();
                    e2[j] -= 1;
                    (c * e[j] as f64, e2)
                })
                .collect(),
        }
    }

    pub fn source(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(c, e)| {
                let mut s = format!("({c:?})");
                for (k, name) in e.iter().zip(names) {
                    match k {
                        0 => {}
                        1 => s.push_str(&format!("*{name}")),
                        _ => s.push_str(&format!("*{name}^{k}")),
                    }
                }
                s
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// `dX/dt = f(X)` with polynomial components and exact derivatives.
#[derive(Debug, Clone)]
pub struct PolySystem {
    pub comps: Vec<Poly>,
    jac: Vec<Vec<Poly>>,
    hess: Vec<Vec<Vec<Poly>>>,
}

impl PolySystem {
    pub fn new(comps: Vec<Poly>) -> Self {
        let n = comps.len();
        let jac: Vec<Vec<Poly>> = comps.iter().map(|p| (0..n).map(|j| p.derivative(j)).collect()).collect();
        let hess = jac.iter().map(|row| row.iter().map(|d| (0..n).map(|k| d.derivative(k)).collect()).collect()).collect();
        PolySystem { comps, jac, hess }
    }

    pub fn random(rng: &mut ChaCha8Rng, n: usize, max_degree: u32, coef: f64) -> Self {
        let comps = (0..n)
            .map(|_| {
                let count = rng.gen_range(2..=n + 3);
                Poly::random(rng, n, max_degree, count, coef)
            })
            .collect();
        PolySystem::new(comps)
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn names(&self) -> Vec<String> {
        if self.dim() == 1 {
            vec!["x".into()]
        } else {
            (1..=self.dim()).map(|i| format!("x{i}")).collect()
        }
    }

    pub fn sources(&self) -> Vec<String> {
        let names = self.names();
        self.comps.iter().map(|p| p.source(&names)).collect()
    }

    pub fn f(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|p| p.eval(x)).collect()
    }

    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.jac.iter().map(|row| row.iter().map(|p| p.eval(x)).collect()).collect()
    }

    /// `F = Df f`.
    pub fn accel(&self, x: &[f64]) -> Vec<f64> {
        let j = self.jacobian(x);
        let f = self.f(x);
        j.iter().map(|row| row.iter().zip(&f).map(|(a, b)| a * b).sum()).collect()
    }

    /// `DF_ij = sum_k d_j(J_ik) f_k + sum_k J_ik J_kj`.
    pub fn accel_jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dim();
        let j = self.jacobian(x);
        let f = self.f(x);
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|c| {
                        (0..n).map(|k| self.hess[i][k][c].eval(x) * f[k] + j[i][k] * j[k][c]).sum()
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
