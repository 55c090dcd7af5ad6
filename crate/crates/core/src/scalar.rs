//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All spectral and energy computations are written against [`Real`], which
//! is implemented for `f32` and `f64`. FFT plans are cached per thread and per
//! scalar type so repeated transforms of the same length do not replan.

use std::cell::RefCell;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::sync::Arc;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::{Fft, FftNum, FftPlanner};

pub use num_complex::Complex;

/// Floating point scalar usable by the solver: `f32` or `f64`.
pub trait Real:
    FftNum
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    fn forward_plan(len: usize) -> Arc<dyn Fft<Self>>;
    fn inverse_plan(len: usize) -> Arc<dyn Fft<Self>>;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_index(n: i64) -> Self {
        Self::from_i64(n).expect("index representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty, $planner:ident) => {
        thread_local! {
            static $planner: RefCell<FftPlanner<$t>> = RefCell::new(FftPlanner::new());
        }

        impl Real for $t {
            fn forward_plan(len: usize) -> Arc<dyn Fft<Self>> {
                $planner.with(|p| p.borrow_mut().plan_fft_forward(len))
            }

            fn inverse_plan(len: usize) -> Arc<dyn Fft<Self>> {
                $planner.with(|p| p.borrow_mut().plan_fft_inverse(len))
            }
        }
    };
}

impl_real!(f32, PLANNER_F32);
impl_real!(f64, PLANNER_F64);

/// Nonlinearity sign: `+1` defocusing, `-1` focusing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sigma {
    Defocusing,
    Focusing,
}

impl Sigma {
    pub fn value<T: Real>(self) -> T {
        match self {
            Sigma::Defocusing => T::one(),
            Sigma::Focusing => -T::one(),
        }
    }
}

impl TryFrom<i8> for Sigma {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Sigma::Defocusing),
            -1 => Ok(Sigma::Focusing),
            other => Err(format!("sigma must be +1 or -1, got {other}")),
        }
    }
}

impl From<Sigma> for i8 {
    fn from(s: Sigma) -> i8 {
        match s {
            Sigma::Defocusing => 1,
            Sigma::Focusing => -1,
        }
    }
}

impl Display for Sigma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:+}", i8::from(*self))
    }
}
