use crate::error::{Error, Result};

/// Coefficients of an explicit Runge-Kutta method.
///
/// Row `j` of `a` holds the `j` coefficients `a[j][0..j]` of stage `j`; row 0
/// is empty. `b_embedded`, when present, are the weights of the lower-order
/// companion solution; the error estimate is `dt * Σ (b - b_embedded) k`.
#[derive(Debug)]
pub struct ButcherTableau {
    pub name: &'static str,
    pub order: u32,
    pub error_order: Option<u32>,
    pub c: &'static [f64],
    pub a: &'static [&'static [f64]],
    pub b: &'static [f64],
    pub b_embedded: Option<&'static [f64]>,
    /// Last stage is evaluated at the propagated solution.
    pub fsal: bool,
}

const CONSISTENCY_TOL: f64 = 1e-14;

impl ButcherTableau {
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    /// Checks shapes, the row-sum condition `c_j = Σ_i a_ji` and that the
    /// weights sum to one.
    pub fn validate(&self) -> Result<()> {
        let s = self.stages();
        let bad = |what: String| Err(Error::invalid(format!("{}: {what}", self.name)));
        if s == 0 || self.a.len() != s || self.b.len() != s {
            return bad("inconsistent stage count".into());
        }
        for (j, row) in self.a.iter().enumerate() {
            if row.len() != j {
                return bad(format!("row {j} has {} entries", row.len()));
            }
            let sum: f64 = row.iter().sum();
            if (sum - self.c[j]).abs() > CONSISTENCY_TOL {
                return bad(format!("row sum {sum} != c[{j}] = {}", self.c[j]));
            }
        }
        let weights = std::iter::once(self.b).chain(self.b_embedded);
        for w in weights {
            if w.len() != s {
                return bad("weight vector length".into());
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > CONSISTENCY_TOL {
                return bad(format!("weights sum to {sum}"));
            }
        }
        if self.fsal {
            // The last stage must be the propagated solution itself.
            let last = self.a[s - 1];
            if self.b[s - 1] != 0.0 || last.iter().zip(self.b).any(|(a, b)| a != b) {
                return bad("last stage is not first-same-as-last".into());
            }
        }
        if self.b_embedded.is_some() != self.error_order.is_some() {
            return bad("embedded weights without error order".into());
        }
        Ok(())
    }
}

pub static EULER: ButcherTableau = ButcherTableau {
    name: "explicit_euler",
    order: 1,
    error_order: None,
    c: &[0.0],
    a: &[&[]],
    b: &[1.0],
    b_embedded: None,
    fsal: false,
};

pub static RK4: ButcherTableau = ButcherTableau {
    name: "explicit_rk4",
    order: 4,
    error_order: None,
    c: &[0.0, 0.5, 0.5, 1.0],
    a: &[&[], &[0.5], &[0.0, 0.5], &[0.0, 0.0, 1.0]],
    b: &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
    b_embedded: None,
    fsal: false,
};

/// Cash-Karp 5(4).
pub static CASH_KARP: ButcherTableau = ButcherTableau {
    name: "explicit_error_rk54_ck",
    order: 5,
    error_order: Some(4),
    c: &[0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0],
    a: &[
        &[],
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0],
        &[-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0],
        &[
            1631.0 / 55296.0,
            175.0 / 512.0,
            575.0 / 13824.0,
            44275.0 / 110592.0,
            253.0 / 4096.0,
        ],
    ],
    b: &[
        37.0 / 378.0,
        0.0,
        250.0 / 621.0,
        125.0 / 594.0,
        0.0,
        512.0 / 1771.0,
    ],
    b_embedded: Some(&[
        2825.0 / 27648.0,
        0.0,
        18575.0 / 48384.0,
        13525.0 / 55296.0,
        277.0 / 14336.0,
        1.0 / 4.0,
    ]),
    fsal: false,
};

/// Dormand-Prince 5(4), first-same-as-last.
pub static DORMAND_PRINCE: ButcherTableau = ButcherTableau {
    name: "explicit_error_dopri5",
    order: 5,
    error_order: Some(4),
    c: &[0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0],
    a: &[
        &[],
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
        ],
        &[
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
        ],
        &[
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ],
    b: &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ],
    b_embedded: Some(&[
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ]),
    fsal: true,
};

/// Coefficients of the Dormand-Prince continuous extension (the fifth
/// interpolation vector, multiplied by `dt` and the stage derivatives).
pub(crate) const DOPRI5_DENSE: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];
