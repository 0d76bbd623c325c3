//! Difference-of-convex split of one bilinear term `2d·y·z` and the affine
//! over-approximation of its concave half.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BilinearRole {
    /// The term enters as `-2d·y·z` (right-hand side of `p_s <= …`, moved left).
    Reach,
    /// The term enters as `+2d·y·z` (right-hand side of `c_s >= …`, moved left).
    Cost,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ConvexPart {
    /// `d·(y² + z²)`
    SumOfSquares,
    /// `d·(y + z)²`
    SquareOfSum,
}

/// `term(y, z) = convex(y, z) + concave(y, z)` with the concave half bounded
/// from above by `lin_y·y + lin_z·z + constant`, tight at `(ŷ, ẑ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearSplit {
    pub role: BilinearRole,
    pub d: f64,
    pub convex: ConvexPart,
    pub lin_y: f64,
    pub lin_z: f64,
    pub constant: f64,
}

impl BilinearSplit {
    /// The original term: `-2dyz` for reachability, `2dyz` for cost.
    pub fn term(&self, y: f64, z: f64) -> f64 {
        match self.role {
            BilinearRole::Reach => -2.0 * self.d * y * z,
            BilinearRole::Cost => 2.0 * self.d * y * z,
        }
    }

    pub fn convex_value(&self, y: f64, z: f64) -> f64 {
        match self.convex {
            ConvexPart::SumOfSquares => self.d * (y * y + z * z),
            ConvexPart::SquareOfSum => self.d * (y + z) * (y + z),
        }
    }

    /// The concave half, exactly.
    pub fn concave_value(&self, y: f64, z: f64) -> f64 {
        match self.role {
            BilinearRole::Reach => -self.d * (y + z) * (y + z),
            BilinearRole::Cost => -self.d * (y * y + z * z),
        }
    }

    /// Affine replacement of the concave half.
    pub fn replacement(&self, y: f64, z: f64) -> f64 {
        self.lin_y * y + self.lin_z * z + self.constant
    }

    /// Convex upper bound of the term used in the convexified constraint.
    pub fn upper_bound(&self, y: f64, z: f64) -> f64 {
        self.convex_value(y, z) + self.replacement(y, z)
    }
}

/// Splits the bilinear term with weight `d > 0` and linearizes its concave
/// half at `(y_hat, z_hat)`.
pub fn convexify_bilinear(d: f64, role: BilinearRole, y_hat: f64, z_hat: f64) -> Result<BilinearSplit> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidModel(format!("bilinear weight {d} must be positive")));
    }
    if !(y_hat.is_finite() && z_hat.is_finite()) {
        return Err(Error::InvalidModel("linearization point must be finite".into()));
    }
    Ok(match role {
        // -d(y+z)² <= d(ŷ+ẑ)² - 2d(ŷ+ẑ)(y+z)
        BilinearRole::Reach => {
            let u = y_hat + z_hat;
            BilinearSplit {
                role,
                d,
                convex: ConvexPart::SumOfSquares,
                lin_y: -2.0 * d * u,
                lin_z: -2.0 * d * u,
                constant: d * u * u,
            }
        }
        // -d(y²+z²) <= d(ŷ²+ẑ²) - 2d(ŷy + ẑz)
        BilinearRole::Cost => BilinearSplit {
            role,
            d,
            convex: ConvexPart::SquareOfSum,
            lin_y: -2.0 * d * y_hat,
            lin_z: -2.0 * d * z_hat,
            constant: d * (y_hat * y_hat + z_hat * z_hat),
        },
    })
}
