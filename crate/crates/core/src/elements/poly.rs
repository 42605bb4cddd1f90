//! Small 2-vector polynomials used as spanning sets for triangle elements.

#[derive(Clone, Debug, Default)]
pub(crate) struct VecPoly {
    terms: Vec<(i32, i32, [f64; 2])>,
}

fn pow(x: f64, a: i32) -> f64 {
    if a <= 0 {
        1.0
    } else {
        x.powi(a)
    }
}

impl VecPoly {
    pub fn scalar_monomial(a: i32, b: i32) -> Self {
        VecPoly {
            terms: vec![(a, b, [1.0, 0.0])],
        }
    }

    pub fn component_monomial(a: i32, b: i32, comp: usize) -> Self {
        let mut c = [0.0; 2];
        c[comp] = 1.0;
        VecPoly {
            terms: vec![(a, b, c)],
        }
    }

    pub fn push(&mut self, a: i32, b: i32, c: [f64; 2]) {
        self.terms.push((a, b, c));
    }

    pub fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        let mut v = [0.0; 2];
        for &(a, b, c) in &self.terms {
            let m = pow(x[0], a) * pow(x[1], b);
            v[0] += c[0] * m;
            v[1] += c[1] * m;
        }
        v
    }

    /// `jac[c][d] = ∂_d v_c`
    pub fn jacobian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let mut j = [[0.0; 2]; 2];
        for &(a, b, c) in &self.terms {
            let dx = if a > 0 {
                a as f64 * pow(x[0], a - 1) * pow(x[1], b)
            } else {
                0.0
            };
            let dy = if b > 0 {
                b as f64 * pow(x[0], a) * pow(x[1], b - 1)
            } else {
                0.0
            };
            for comp in 0..2 {
                j[comp][0] += c[comp] * dx;
                j[comp][1] += c[comp] * dy;
            }
        }
        j
    }
}

/// Exponents `(a, b)` with `a + b <= deg`, graded.
pub(crate) fn monomials_upto(deg: i32) -> Vec<(i32, i32)> {
    (0..=deg).flat_map(homogeneous).collect()
}

pub(crate) fn homogeneous(deg: i32) -> Vec<(i32, i32)> {
    (0..=deg).map(|b| (deg - b, b)).collect()
}
