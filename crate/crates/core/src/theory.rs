//! Closed-form stabilized Q-values on the fair and rational pathways, and the
//! learning-rate boundary at which a proposer sitting in `s1` abandons the
//! low offer after a responder explores the fair threshold.
//!
//! Proposer payoffs on the relevant pathways:
//! `pi(l,l) = 1 - l`, `pi(m,m) = 0.5`, and the failed deal `pi(l,m) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::TheoryError;
use crate::game::{GameParams, FAIR_SHARE};

/// Stabilized proposer values for one `(game, gamma)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub low: f64,
    pub gamma: f64,
    /// `Q*[s5, p_m]`: fair self-loop.
    pub fair_self_loop: f64,
    /// `Q*[s1, p_m]`: one step from `s1` into the fair loop.
    pub fair_from_rational: f64,
    /// `Q*[s1, p_l]`: rational self-loop.
    pub rational_self_loop: f64,
    /// `Q*[s2, p_m]`: one step from `s2` into the fair loop.
    pub fair_from_failed: f64,
}

fn check_gamma(gamma: f64) -> Result<(), TheoryError> {
    if (0.0..1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(TheoryError::Gamma(gamma))
    }
}

/// Proposer payoff of the rational pair `(p_l, q_l)`.
fn rational_payoff(game: &GameParams) -> f64 {
    1.0 - game.low()
}

pub fn fixed_points(game: &GameParams, gamma: f64) -> Result<FixedPointReport, TheoryError> {
    check_gamma(gamma)?;
    let fair = FAIR_SHARE;
    let fair_self_loop = fair / (1.0 - gamma);
    let feed = gamma * fair / (1.0 - gamma) + fair;
    Ok(FixedPointReport {
        low: game.low(),
        gamma,
        fair_self_loop,
        fair_from_rational: feed,
        rational_self_loop: rational_payoff(game) / (1.0 - gamma),
        fair_from_failed: feed,
    })
}

/// Result of the boundary formula at one `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    /// Critical learning rate in `(0, 1]`.
    Alpha(f64),
    /// The formula gives a value above 1: no boundary inside the physical
    /// range of the learning rate.
    OutOfRange(f64),
}

impl Boundary {
    pub fn alpha(self) -> Option<f64> {
        match self {
            Boundary::Alpha(a) => Some(a),
            Boundary::OutOfRange(_) => None,
        }
    }
}

/// `alpha = (pi_ll - pi_mm) / (pi_ll - gamma * pi_mm)`.
///
/// Only defined for `l < 0.5`; the responder-side counterpart has no closed
/// form and is not provided.
pub fn boundary_alpha(game: &GameParams, gamma: f64) -> Result<Boundary, TheoryError> {
    check_gamma(gamma)?;
    let low = game.low();
    if !(low > 0.0 && low < FAIR_SHARE) {
        return Err(TheoryError::LowLevel(low));
    }
    let rational = rational_payoff(game);
    let alpha = (rational - FAIR_SHARE) / (rational - gamma * FAIR_SHARE);
    Ok(if alpha > 1.0 {
        Boundary::OutOfRange(alpha)
    } else {
        Boundary::Alpha(alpha)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub low: f64,
    pub points: Vec<(f64, Boundary)>,
}

pub fn boundary_curve(game: &GameParams, gammas: &[f64]) -> Result<BoundaryCurve, TheoryError> {
    let points = gammas
        .iter()
        .map(|&g| boundary_alpha(game, g).map(|b| (g, b)))
        .collect::<Result<_, _>>()?;
    Ok(BoundaryCurve {
        low: game.low(),
        points,
    })
}

/// Left-hand side minus right-hand side of the balance that defines the
/// boundary: `(1 - a) Q*[s1,p_l] + a (gamma Q*[s2,p_m] + pi(l,m)) - Q*[s1,p_m]`.
pub fn balance_residual(game: &GameParams, gamma: f64, alpha: f64) -> Result<f64, TheoryError> {
    let fp = fixed_points(game, gamma)?;
    let failed_deal = 0.0;
    Ok(
        (1.0 - alpha) * fp.rational_self_loop + alpha * (gamma * fp.fair_from_failed + failed_deal)
            - fp.fair_from_rational,
    )
}
