//! Problem coefficients (sigma, nu, beta, f, kappa1, kappa2), the
//! manufactured-solution catalog, forcing derivation from the strong form,
//! and the well-posedness hypothesis report.
//!
//! 2D conventions used throughout: rot v = d1 v2 - d2 v1 (scalar), and the
//! curl of a scalar q is the vector (d2 q, -d1 q), the adjoint of rot under
//! integration by parts. The cross of two 2-vectors a x b is the scalar
//! a1 b2 - a2 b1.

use std::sync::Arc;

use thiserror::Error;

use crate::mesh::Point;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("unknown viscosity name '{0}' (valid: nu_a, nu_b, nu_d, nu_e)")]
    UnknownViscosity(String),
    #[error("unknown manufactured case '{0}' (valid: {})", CASE_NAMES.join(", "))]
    UnknownCase(String),
}

pub const CASE_NAMES: [&str; 4] =
    ["example1_nu_a", "example1_nu_b", "example3_nu_d", "example3_nu_e"];

const FD_STEP: f64 = 1e-6;

type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
type MatrixFn = Arc<dyn Fn(Point) -> [[f64; 2]; 2] + Send + Sync>;

/// Scalar coefficient field; the gradient falls back to central finite
/// differences (step 1e-6) when no analytic gradient is wired.
#[derive(Clone)]
pub struct ScalarField {
    value: ScalarFn,
    gradient: Option<VectorFn>,
}

impl ScalarField {
    pub fn new(value: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Self { value: Arc::new(value), gradient: None }
    }

    pub fn with_gradient(
        value: impl Fn(Point) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Self { value: Arc::new(value), gradient: Some(Arc::new(gradient)) }
    }

    pub fn constant(c: f64) -> Self {
        Self::with_gradient(move |_| c, |_| [0.0, 0.0])
    }

    pub fn eval(&self, p: Point) -> f64 {
        (self.value)(p)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn grad(&self, p: Point) -> [f64; 2] {
        match &self.gradient {
            Some(g) => g(p),
            None => {
                let h = FD_STEP;
                let v = &self.value;
                [
                    (v([p[0] + h, p[1]]) - v([p[0] - h, p[1]])) / (2.0 * h),
                    (v([p[0], p[1] + h]) - v([p[0], p[1] - h])) / (2.0 * h),
                ]
            }
        }
    }
}

/// Vector coefficient field with Jacobian (row i holds the gradient of
/// component i).
#[derive(Clone)]
pub struct VectorField {
    value: VectorFn,
    jacobian: Option<MatrixFn>,
}

impl VectorField {
    pub fn new(value: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Self { value: Arc::new(value), jacobian: None }
    }

    pub fn with_jacobian(
        value: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static,
        jacobian: impl Fn(Point) -> [[f64; 2]; 2] + Send + Sync + 'static,
    ) -> Self {
        Self { value: Arc::new(value), jacobian: Some(Arc::new(jacobian)) }
    }

    pub fn zero() -> Self {
        Self::with_jacobian(|_| [0.0, 0.0], |_| [[0.0, 0.0], [0.0, 0.0]])
    }

    pub fn eval(&self, p: Point) -> [f64; 2] {
        (self.value)(p)
    }

    pub fn jacobian(&self, p: Point) -> [[f64; 2]; 2] {
        match &self.jacobian {
            Some(j) => j(p),
            None => {
                let h = FD_STEP;
                let v = &self.value;
                let (xp, xm) = (v([p[0] + h, p[1]]), v([p[0] - h, p[1]]));
                let (yp, ym) = (v([p[0], p[1] + h]), v([p[0], p[1] - h]));
                [
                    [(xp[0] - xm[0]) / (2.0 * h), (yp[0] - ym[0]) / (2.0 * h)],
                    [(xp[1] - xm[1]) / (2.0 * h), (yp[1] - ym[1]) / (2.0 * h)],
                ]
            }
        }
    }

    pub fn divergence(&self, p: Point) -> f64 {
        let j = self.jacobian(p);
        j[0][0] + j[1][1]
    }

    pub fn rot(&self, p: Point) -> f64 {
        let j = self.jacobian(p);
        j[1][0] - j[0][1]
    }
}

/// All coefficients of the augmented weak form.
#[derive(Clone)]
pub struct ProblemData {
    pub sigma: f64,
    pub nu: ScalarField,
    pub nu0: f64,
    pub nu1: f64,
    pub beta: VectorField,
    pub f: VectorField,
    pub kappa1: f64,
    pub kappa2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    UnitSquare,
    LShape,
}

impl DomainKind {
    pub fn area(&self) -> f64 {
        match self {
            DomainKind::UnitSquare => 1.0,
            DomainKind::LShape => 3.0,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            DomainKind::UnitSquare => (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]),
            DomainKind::LShape => {
                (-1.0..=1.0).contains(&p[0])
                    && (-1.0..=1.0).contains(&p[1])
                    && !(p[0] > 0.0 && p[1] > 0.0)
            }
        }
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            DomainKind::UnitSquare => ([0.0, 0.0], [1.0, 1.0]),
            DomainKind::LShape => ([-1.0, -1.0], [1.0, 1.0]),
        }
    }
}

/// Exact solution fields plus derived problem data.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub domain: DomainKind,
    pub exact_velocity: VectorField,
    pub exact_vorticity: ScalarField,
    pub exact_pressure: ScalarField,
    pub data: ProblemData,
}

// ---------------------------------------------------------------------------
// Separable 1D machinery: functions of the form P(x) * exp(a x^2 + b x + c),
// closed under differentiation, so analytic derivatives of any order of the
// tensor-product streamfunctions are available.
// ---------------------------------------------------------------------------

/// Polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![0.0; n];
        for (i, &a) in self.0.iter().enumerate() {
            out[i] += a;
        }
        for (i, &b) in other.0.iter().enumerate() {
            out[i] += b;
        }
        Poly(out)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|&c| s * c).collect())
    }

    /// (x + shift)^n expanded.
    pub fn shifted_power(shift: f64, n: usize) -> Poly {
        let mut p = Poly(vec![1.0]);
        let lin = Poly(vec![shift, 1.0]);
        for _ in 0..n {
            p = p.mul(&lin);
        }
        p
    }
}

/// P(x) * exp(a x^2 + b x + c); a = b = c = 0 gives a plain polynomial.
#[derive(Debug, Clone)]
pub struct Sep1D {
    pub poly: Poly,
    pub exp_coeffs: [f64; 3], // (a, b, c)
}

impl Sep1D {
    pub fn poly(poly: Poly) -> Self {
        Self { poly, exp_coeffs: [0.0; 3] }
    }

    pub fn poly_exp(poly: Poly, a: f64, b: f64, c: f64) -> Self {
        Self { poly, exp_coeffs: [a, b, c] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let [a, b, c] = self.exp_coeffs;
        let e = if a == 0.0 && b == 0.0 && c == 0.0 {
            1.0
        } else {
            ((a * x + b) * x + c).exp()
        };
        self.poly.eval(x) * e
    }

    pub fn derivative(&self) -> Sep1D {
        let [a, b, _] = self.exp_coeffs;
        // (P e)' = (P' + P (2a x + b)) e
        let inner = Poly(vec![b, 2.0 * a]);
        Sep1D {
            poly: self.poly.derivative().add(&self.poly.mul(&inner)),
            exp_coeffs: self.exp_coeffs,
        }
    }
}

/// psi(x, y) = fx(x) * fy(y) with analytic mixed derivatives up to order 3.
#[derive(Debug, Clone)]
pub struct SeparableStream {
    fx: Vec<Sep1D>, // derivative chain fx, fx', fx'', fx'''
    fy: Vec<Sep1D>,
}

impl SeparableStream {
    pub fn new(fx: Sep1D, fy: Sep1D) -> Self {
        let chain = |f: Sep1D| {
            let mut v = vec![f];
            for _ in 0..3 {
                v.push(v.last().unwrap().derivative());
            }
            v
        };
        Self { fx: chain(fx), fy: chain(fy) }
    }

    /// d^i/dx^i d^j/dy^j psi.
    pub fn deriv(&self, i: usize, j: usize, p: Point) -> f64 {
        self.fx[i].eval(p[0]) * self.fy[j].eval(p[1])
    }
}

// ---------------------------------------------------------------------------
// Viscosity catalog
// ---------------------------------------------------------------------------

fn exp_clamped(exponent: f64) -> f64 {
    if exponent < -700.0 {
        0.0
    } else {
        exponent.exp()
    }
}

/// Sharp exponential bump exp(-scale ((x-x0)^10 + (y-y0)^10)), evaluated in
/// log space with underflow clamped to zero.
fn bump10(scale: f64, center: f64, p: Point) -> (f64, [f64; 2]) {
    let (dx, dy) = (p[0] - center, p[1] - center);
    let exponent = -scale * (dx.powi(10) + dy.powi(10));
    let e = exp_clamped(exponent);
    if e == 0.0 {
        return (0.0, [0.0, 0.0]);
    }
    let gx = e * (-scale * 10.0 * dx.powi(9));
    let gy = e * (-scale * 10.0 * dy.powi(9));
    (e, [gx, gy])
}

/// Built-in variable-viscosity catalog; names: nu_a, nu_b (unit square,
/// nu0 = 0.001), nu_d, nu_e (L-shape, nu0 = 0.1); nu1 = 1 throughout.
pub fn viscosity_catalog(name: &str) -> Result<(ScalarField, f64, f64), ProblemError> {
    match name {
        "nu_a" => {
            let (nu0, nu1) = (0.001, 1.0);
            let d = nu1 - nu0;
            Ok((
                ScalarField::with_gradient(
                    move |p| nu0 + d * p[0] * p[1],
                    move |p| [d * p[1], d * p[0]],
                ),
                nu0,
                nu1,
            ))
        }
        "nu_b" => {
            let (nu0, nu1) = (0.001, 1.0);
            let d = nu1 - nu0;
            Ok((
                ScalarField::with_gradient(
                    move |p| nu0 + d * bump10(1e13, 0.5, p).0,
                    move |p| {
                        let (_, g) = bump10(1e13, 0.5, p);
                        [d * g[0], d * g[1]]
                    },
                ),
                nu0,
                nu1,
            ))
        }
        "nu_d" => {
            let (nu0, nu1) = (0.1, 1.0);
            let c = 721.0 / 16.0 * (nu1 - nu0);
            Ok((
                ScalarField::with_gradient(
                    move |p| {
                        let [x, y] = p;
                        nu0 + c * x * x * (1.0 - x) * y * y * (1.0 - y)
                    },
                    move |p| {
                        let [x, y] = p;
                        let gx = c * (2.0 * x - 3.0 * x * x) * y * y * (1.0 - y);
                        let gy = c * x * x * (1.0 - x) * (2.0 * y - 3.0 * y * y);
                        [gx, gy]
                    },
                ),
                nu0,
                nu1,
            ))
        }
        "nu_e" => {
            let (nu0, nu1) = (0.1, 1.0);
            let d = nu1 - nu0;
            Ok((
                ScalarField::with_gradient(
                    move |p| nu0 + d * bump10(1e12, 0.5, p).0,
                    move |p| {
                        let (_, g) = bump10(1e12, 0.5, p);
                        [d * g[0], d * g[1]]
                    },
                ),
                nu0,
                nu1,
            ))
        }
        other => Err(ProblemError::UnknownViscosity(other.to_string())),
    }
}

// ---------------------------------------------------------------------------
// Forcing from the strong momentum equation
// ---------------------------------------------------------------------------

/// Everything needed to evaluate the momentum residual of an exact solution.
pub struct StrongFormFields {
    pub velocity: VectorField,
    pub vorticity: ScalarField,
    pub pressure: ScalarField,
}

/// f = sigma u + nu curl omega - 2 eps(u) grad nu + (beta . grad) u + grad p,
/// with curl omega = (d2 omega, -d1 omega) for scalar omega.
pub fn derive_forcing(
    sigma: f64,
    nu: &ScalarField,
    beta: &VectorField,
    fields: &StrongFormFields,
    p: Point,
) -> [f64; 2] {
    let u = fields.velocity.eval(p);
    let ju = fields.velocity.jacobian(p);
    let gw = fields.vorticity.grad(p);
    let gp = fields.pressure.grad(p);
    let nu_v = nu.eval(p);
    let gn = nu.grad(p);
    let b = beta.eval(p);
    let curl_w = [gw[1], -gw[0]];
    let eps = [
        [ju[0][0], 0.5 * (ju[0][1] + ju[1][0])],
        [0.5 * (ju[0][1] + ju[1][0]), ju[1][1]],
    ];
    let conv = [
        ju[0][0] * b[0] + ju[0][1] * b[1],
        ju[1][0] * b[0] + ju[1][1] * b[1],
    ];
    [
        sigma * u[0] + nu_v * curl_w[0] - 2.0 * (eps[0][0] * gn[0] + eps[0][1] * gn[1])
            + conv[0]
            + gp[0],
        sigma * u[1] + nu_v * curl_w[1] - 2.0 * (eps[1][0] * gn[0] + eps[1][1] * gn[1])
            + conv[1]
            + gp[1],
    ]
}

// ---------------------------------------------------------------------------
// Manufactured cases
// ---------------------------------------------------------------------------

fn stream_velocity(stream: &Arc<SeparableStream>) -> VectorField {
    // u = curl psi = (d2 psi, -d1 psi); div u = 0 by construction
    let s1 = stream.clone();
    let s2 = stream.clone();
    VectorField::with_jacobian(
        move |p| [s1.deriv(0, 1, p), -s1.deriv(1, 0, p)],
        move |p| {
            [
                [s2.deriv(1, 1, p), s2.deriv(0, 2, p)],
                [-s2.deriv(2, 0, p), -s2.deriv(1, 1, p)],
            ]
        },
    )
}

fn stream_vorticity(stream: &Arc<SeparableStream>) -> ScalarField {
    // omega = rot u = -(laplacian psi)
    let s1 = stream.clone();
    let s2 = stream.clone();
    ScalarField::with_gradient(
        move |p| -(s1.deriv(2, 0, p) + s1.deriv(0, 2, p)),
        move |p| {
            [
                -(s2.deriv(3, 0, p) + s2.deriv(1, 2, p)),
                -(s2.deriv(2, 1, p) + s2.deriv(0, 3, p)),
            ]
        },
    )
}

fn wire_case(
    name: &str,
    domain: DomainKind,
    sigma: f64,
    nu_name: &str,
    stream: SeparableStream,
    pressure: ScalarField,
) -> Result<ManufacturedCase, ProblemError> {
    let (nu, nu0, nu1) = viscosity_catalog(nu_name)?;
    let stream = Arc::new(stream);
    let velocity = stream_velocity(&stream);
    let vorticity = stream_vorticity(&stream);
    let beta = velocity.clone();

    let f_nu = nu.clone();
    let f_beta = beta.clone();
    let f_fields = Arc::new(StrongFormFields {
        velocity: velocity.clone(),
        vorticity: vorticity.clone(),
        pressure: pressure.clone(),
    });
    let f = VectorField::new(move |p| derive_forcing(sigma, &f_nu, &f_beta, &f_fields, p));

    Ok(ManufacturedCase {
        name: name.to_string(),
        domain,
        exact_velocity: velocity,
        exact_vorticity: vorticity,
        exact_pressure: pressure,
        data: ProblemData {
            sigma,
            nu,
            nu0,
            nu1,
            beta,
            f,
            kappa1: 2.0 / 3.0 * nu0,
            kappa2: nu0 / 2.0,
        },
    })
}

/// Example 1: psi = 1000 x^2 (1-x)^4 y^3 (1-y)^2 on the unit square,
/// p = (x - 1/2)^3 y^2 + (1-x)^3 (y - 1/2)^3, sigma = 100, beta = u.
fn example1(nu_name: &str) -> Result<ManufacturedCase, ProblemError> {
    let fx = Sep1D::poly(
        Poly::shifted_power(0.0, 2)
            .mul(&Poly::shifted_power(-1.0, 4))
            .scale(1000.0),
    );
    let fy = Sep1D::poly(Poly::shifted_power(0.0, 3).mul(&Poly::shifted_power(-1.0, 2)));
    // (1-x)^4 = (x-1)^4, (1-y)^2 = (y-1)^2: even powers, sign drops out
    let stream = SeparableStream::new(fx, fy);
    let pressure = ScalarField::with_gradient(
        |p| {
            let [x, y] = p;
            (x - 0.5).powi(3) * y * y + (1.0 - x).powi(3) * (y - 0.5).powi(3)
        },
        |p| {
            let [x, y] = p;
            [
                3.0 * (x - 0.5).powi(2) * y * y - 3.0 * (1.0 - x).powi(2) * (y - 0.5).powi(3),
                2.0 * (x - 0.5).powi(3) * y + 3.0 * (1.0 - x).powi(3) * (y - 0.5).powi(2),
            ]
        },
    );
    wire_case(
        &format!("example1_{nu_name}"),
        DomainKind::UnitSquare,
        100.0,
        nu_name,
        stream,
        pressure,
    )
}

/// Example 3 on the L-shaped domain: psi = x^2 (1-x)^2 y^2 (1-y)^2
/// exp(-50((x-0.025)^2 + (y-0.025)^2)), p = (1-x^2-y^2)/((x-0.025)^2 +
/// (y-0.025)^2) - 12.742942014/3, sigma = 10, beta = u.
fn example3(nu_name: &str) -> Result<ManufacturedCase, ProblemError> {
    let a = 0.025;
    let gauss = |center: f64| {
        // exp(-50 (t-center)^2) = exp(-50 t^2 + 100 center t - 50 center^2)
        (-50.0, 100.0 * center, -50.0 * center * center)
    };
    let (ax, bx, cx) = gauss(a);
    let fx = Sep1D::poly_exp(
        Poly::shifted_power(0.0, 2).mul(&Poly::shifted_power(-1.0, 2)),
        ax,
        bx,
        cx,
    );
    let fy = Sep1D::poly_exp(
        Poly::shifted_power(0.0, 2).mul(&Poly::shifted_power(-1.0, 2)),
        ax,
        bx,
        cx,
    );
    let stream = SeparableStream::new(fx, fy);

    let shift = 12.742942014 / 3.0;
    let pressure = ScalarField::with_gradient(
        move |p| {
            let [x, y] = p;
            let r2 = (x - a).powi(2) + (y - a).powi(2);
            (1.0 - x * x - y * y) / r2 - shift
        },
        move |p| {
            let [x, y] = p;
            let (dx, dy) = (x - a, y - a);
            let r2 = dx * dx + dy * dy;
            let g = 1.0 - x * x - y * y;
            [
                (-2.0 * x * r2 - g * 2.0 * dx) / (r2 * r2),
                (-2.0 * y * r2 - g * 2.0 * dy) / (r2 * r2),
            ]
        },
    );
    wire_case(
        &format!("example3_{nu_name}"),
        DomainKind::LShape,
        10.0,
        nu_name,
        stream,
        pressure,
    )
}

pub fn manufactured_case(name: &str) -> Result<ManufacturedCase, ProblemError> {
    match name {
        "example1_nu_a" => example1("nu_a"),
        "example1_nu_b" => example1("nu_b"),
        "example3_nu_d" => example3("nu_d"),
        "example3_nu_e" => example3("nu_e"),
        other => Err(ProblemError::UnknownCase(other.to_string())),
    }
}

// ---------------------------------------------------------------------------
// Well-posedness hypothesis report
// ---------------------------------------------------------------------------

/// Diagnostic report for the sufficient well-posedness conditions in the
/// solenoidal-convection case; carries pass/fail flags, never aborts.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub nu0_sampled: f64,
    pub nu1_sampled: f64,
    pub grad_nu_inf: f64,
    /// sigma nu0 > 9 ||grad nu||_inf^2 (strict).
    pub viscosity_condition: bool,
    /// kappa1 == (2/3) nu0 up to roundoff.
    pub kappa1_matches: bool,
    /// kappa2 > nu0 / 3.
    pub kappa2_valid: bool,
    /// Ellipticity constant from the min expression (solenoidal case);
    /// meaningful when all flags pass.
    pub alpha: f64,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.viscosity_condition && self.kappa1_matches && self.kappa2_valid
    }
}

/// Samples nu on a dense grid (>= 200 x 200 over the domain bounding box)
/// and evaluates the sufficient conditions. `beta_solenoidal` drops the
/// div-beta contributions from the ellipticity constant; all catalog cases
/// use beta = u with div u = 0.
pub fn check_wellposedness(
    data: &ProblemData,
    domain: DomainKind,
    beta_solenoidal: bool,
) -> HypothesisReport {
    assert!(beta_solenoidal, "non-solenoidal convection hypothesis is not evaluated");
    let n = 200;
    let (lo, hi) = domain.bounding_box();
    let mut nu0 = f64::MAX;
    let mut nu1 = f64::MIN;
    let mut grad_inf = 0.0f64;
    for j in 0..=n {
        for i in 0..=n {
            let p = [
                lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64,
                lo[1] + (hi[1] - lo[1]) * j as f64 / n as f64,
            ];
            if !domain.contains(p) {
                continue;
            }
            let v = data.nu.eval(p);
            nu0 = nu0.min(v);
            nu1 = nu1.max(v);
            let g = data.nu.grad(p);
            grad_inf = grad_inf.max(g[0].hypot(g[1]));
        }
    }
    let viscosity_condition = data.sigma * nu0 > 9.0 * grad_inf * grad_inf;
    let kappa1_matches = (data.kappa1 - 2.0 / 3.0 * nu0).abs() <= 1e-10 * nu0.max(1e-300);
    let kappa2_valid = data.kappa2 > nu0 / 3.0;
    let alpha = (nu0 / 3.0)
        .min(nu0 / 6.0)
        .min(data.kappa2 - nu0 / 6.0)
        .min(data.sigma - 9.0 * grad_inf * grad_inf / nu0);
    HypothesisReport {
        nu0_sampled: nu0,
        nu1_sampled: nu1,
        grad_nu_inf: grad_inf,
        viscosity_condition,
        kappa1_matches,
        kappa2_valid,
        alpha,
    }
}
