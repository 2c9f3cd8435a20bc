//! Unity-feedback loops around a fractional plant and controller.

use num_complex::Complex64;

use super::approx::{rationalize, RationalizeSettings};
use super::fractional::FractionalTf;
use super::freq::FrequencyEval;
use super::polynomial::Polynomial;
use super::rational::RationalTf;
use crate::error::{Error, Result};

/// `G = k C P` with `S = 1/(1+G)` and `T = G/(1+G)`, all evaluated exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoop {
    plant: FractionalTf,
    controller: FractionalTf,
    gain_scale: f64,
}

/// Which closed-loop map an evaluator returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopMap {
    Open,
    Sensitivity,
    Complementary,
}

/// Borrowing evaluator for one of the loop maps.
#[derive(Debug, Clone, Copy)]
pub struct LoopEvaluator<'a> {
    inner: &'a ClosedLoop,
    map: LoopMap,
}

impl FrequencyEval for LoopEvaluator<'_> {
    fn response_at(&self, omega: f64) -> Option<Complex64> {
        let g = self.inner.open_at(omega)?;
        match self.map {
            LoopMap::Open => Some(g),
            LoopMap::Sensitivity => Some(1.0 / (1.0 + g)),
            LoopMap::Complementary => Some(g / (1.0 + g)),
        }
    }
}

/// Rational versions of the loop maps, for time simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalizedLoop {
    pub open: RationalTf,
    pub sensitivity: RationalTf,
    pub complementary: RationalTf,
}

impl ClosedLoop {
    pub fn new(plant: FractionalTf, controller: FractionalTf) -> Self {
        Self {
            plant,
            controller,
            gain_scale: 1.0,
        }
    }

    /// The same loop with the controller multiplied by `k`.
    pub fn with_gain_scale(&self, k: f64) -> Self {
        Self {
            gain_scale: k,
            ..self.clone()
        }
    }

    pub fn plant(&self) -> &FractionalTf {
        &self.plant
    }

    pub fn controller(&self) -> &FractionalTf {
        &self.controller
    }

    pub fn gain_scale(&self) -> f64 {
        self.gain_scale
    }

    pub fn open_at(&self, omega: f64) -> Option<Complex64> {
        let p = self.plant.response_at(omega)?;
        let c = self.controller.response_at(omega)?;
        let g = self.gain_scale * c * p;
        g.is_finite().then_some(g)
    }

    pub fn evaluator(&self, map: LoopMap) -> LoopEvaluator<'_> {
        LoopEvaluator { inner: self, map }
    }

    pub fn open(&self) -> LoopEvaluator<'_> {
        self.evaluator(LoopMap::Open)
    }

    pub fn sensitivity(&self) -> LoopEvaluator<'_> {
        self.evaluator(LoopMap::Sensitivity)
    }

    pub fn complementary(&self) -> LoopEvaluator<'_> {
        self.evaluator(LoopMap::Complementary)
    }

    /// Oustaloup/Padé rationalization of plant and controller, then closing the loop.
    pub fn rationalized(&self, settings: &RationalizeSettings) -> Result<RationalizedLoop> {
        let p = rationalize(&self.plant, settings)?;
        let c = rationalize(&self.controller, settings)?;
        let open = p.series(&c).scale(self.gain_scale);
        if !open.is_proper() {
            return Err(Error::Improper {
                num: open.num().degree(),
                den: open.den().degree(),
            });
        }
        let char_poly: Polynomial = open.den() + open.num();
        if char_poly.is_zero() {
            return Err(Error::Numerical(
                "characteristic polynomial vanished".into(),
            ));
        }
        let complementary = RationalTf::new(open.num().clone(), char_poly.clone())?;
        let sensitivity = RationalTf::new(open.den().clone(), char_poly)?;
        Ok(RationalizedLoop {
            open,
            sensitivity,
            complementary,
        })
    }
}
