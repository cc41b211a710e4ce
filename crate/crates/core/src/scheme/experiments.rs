use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// A vector field of position.
pub type VectorField = Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;
/// A time-dependent body force `f(t, x)`.
pub type Forcing = Arc<dyn Fn(f64, [f64; 3]) -> [f64; 3] + Send + Sync>;

/// Built-in problem setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Abc3d,
    OrszagTang,
    Harris,
    Custom,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Abc3d => "abc3d",
            Experiment::OrszagTang => "orszag-tang",
            Experiment::Harris => "harris",
            Experiment::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "abc3d" | "abc" => Some(Experiment::Abc3d),
            "orszag-tang" | "orszag_tang" | "ot" => Some(Experiment::OrszagTang),
            "harris" => Some(Experiment::Harris),
            "custom" => Some(Experiment::Custom),
            _ => None,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Initial velocity and magnetic vector potential, `B0 = curl A0`.
#[derive(Clone)]
pub enum InitialData {
    Zero,
    Abc,
    OrszagTang,
    /// Harris sheet with amplitude `b0` and thickness `delta`.
    Harris {
        b0: f64,
        delta: f64,
    },
    Custom {
        velocity: VectorField,
        potential: VectorField,
    },
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Zero => write!(f, "Zero"),
            InitialData::Abc => write!(f, "Abc"),
            InitialData::OrszagTang => write!(f, "OrszagTang"),
            InitialData::Harris { b0, delta } => write!(f, "Harris {{ b0: {b0}, delta: {delta} }}"),
            InitialData::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// Harris sheet amplitude used when none is given.
pub const HARRIS_B0: f64 = 1.0;
/// Harris sheet thickness used when none is given.
pub const HARRIS_DELTA: f64 = 0.1;

impl InitialData {
    pub fn velocity(&self, x: [f64; 3]) -> [f64; 3] {
        let (sx, sy, sz) = (x[0], x[1], x[2]);
        match self {
            InitialData::Zero | InitialData::Harris { .. } => [0.0; 3],
            InitialData::Abc => [
                (2.0 * PI * sy).sin() * (PI * sz).cos(),
                (PI * sy).sin() * (PI * sx).cos(),
                (PI * sx).sin() * (PI * sy).cos(),
            ],
            InitialData::OrszagTang => [
                -2.5 * (2.0 * PI * sy).sin(),
                2.5 * (2.0 * PI * sx).sin(),
                0.0,
            ],
            InitialData::Custom { velocity, .. } => velocity(x),
        }
    }

    pub fn potential(&self, x: [f64; 3]) -> [f64; 3] {
        let (sx, sy, sz) = (x[0], x[1], x[2]);
        match self {
            InitialData::Zero => [0.0; 3],
            InitialData::Abc => [
                (2.0 * PI * sy).sin() * (PI * sz).sin(),
                (2.0 * PI * sy).sin() * (PI * sx).sin(),
                (2.0 * PI * sx).sin() * (PI * sy).sin(),
            ],
            InitialData::OrszagTang => {
                let a = (PI * sx).sin()
                    * (PI * sy).sin()
                    * (0.25 * (4.0 * PI * sx).cos() + 2.0 * (2.0 * PI * sy).cos())
                    / PI;
                [0.0, 0.0, a]
            }
            InitialData::Harris { b0, delta } => {
                let a = b0
                    * delta
                    * (PI * sx).sin()
                    * (PI * sy).sin()
                    * (PI * sz).sin()
                    * ((sy - 0.5) / delta).cosh().ln();
                [0.0, 0.0, a]
            }
            InitialData::Custom { potential, .. } => potential(x),
        }
    }

    /// `B0 = curl A0` by fourth-order central differences of the potential.
    pub fn magnetic(&self, x: [f64; 3]) -> [f64; 3] {
        let j = jacobian(&|y| self.potential(y), x);
        [j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]]
    }
}

/// Jacobian `J[r][k] = d f_r / d x_k` by fourth-order central differences.
pub fn jacobian(f: &dyn Fn([f64; 3]) -> [f64; 3], x: [f64; 3]) -> [[f64; 3]; 3] {
    let h = 2e-3;
    let mut jac = [[0.0; 3]; 3];
    for k in 0..3 {
        let at = |s: f64| {
            let mut y = x;
            y[k] += s * h;
            f(y)
        };
        let (p1, m1, p2, m2) = (at(1.0), at(-1.0), at(2.0), at(-2.0));
        for r in 0..3 {
            jac[r][k] = (8.0 * (p1[r] - m1[r]) - (p2[r] - m2[r])) / (12.0 * h);
        }
    }
    jac
}

/// Physical parameters of an experiment preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    pub nu: f64,
    pub sigma: f64,
    pub eta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub dim: usize,
}

pub fn parameters(exp: Experiment) -> Parameters {
    match exp {
        Experiment::Abc3d => Parameters {
            nu: 0.005,
            sigma: 0.005,
            eta: 0.1,
            alpha1: 1e-5,
            alpha2: 1e-5,
            dim: 3,
        },
        Experiment::OrszagTang => Parameters {
            nu: 0.002,
            sigma: 0.002,
            eta: 0.1,
            alpha1: 1e-8,
            alpha2: 1e-5,
            dim: 2,
        },
        Experiment::Harris => Parameters {
            nu: 0.004,
            sigma: 0.008,
            eta: 0.15,
            alpha1: 1e-5,
            alpha2: 1e-5,
            dim: 3,
        },
        Experiment::Custom => Parameters {
            nu: 0.01,
            sigma: 0.01,
            eta: 0.0,
            alpha1: 1e-5,
            alpha2: 1e-5,
            dim: 2,
        },
    }
}

pub fn initial_data(exp: Experiment) -> InitialData {
    match exp {
        Experiment::Abc3d => InitialData::Abc,
        Experiment::OrszagTang => InitialData::OrszagTang,
        Experiment::Harris => InitialData::Harris {
            b0: HARRIS_B0,
            delta: HARRIS_DELTA,
        },
        Experiment::Custom => InitialData::Zero,
    }
}
