//! Unit frames, fundamental forms, mean curvature and elastic forces computed
//! from differential jets.
//!
//! Normals are reported exactly as the frame formulas produce them: the 2D
//! normal is the unit tangent rotated by +90° (inward for counterclockwise
//! curves) and the 3D normal is `τ^λ × τ^θ` normalized (outward for the
//! longitude/latitude sphere parameterization).

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};
use crate::shapes::{Jet2D, Jet3D};

/// Below this a tangent (or tangent cross product) is treated as zero.
pub const DEGENERATE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame2D {
    pub tangent: Vector2<f64>,
    pub normal: Vector2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame3D {
    pub tangent_lambda: Vector3<f64>,
    pub tangent_theta: Vector3<f64>,
    pub normal: Vector3<f64>,
}

/// Coefficients of the first (`E, F, G`) and second (`e, f, g`) fundamental forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalForms {
    pub big_e: f64,
    pub big_f: f64,
    pub big_g: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl FundamentalForms {
    pub fn first_determinant(&self) -> f64 {
        self.big_e * self.big_g - self.big_f * self.big_f
    }
}

/// Fiber constant `K0` (2D) and surface-tension coefficient `γ` (3D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub k0: f64,
    pub gamma: f64,
}

impl MaterialParams {
    pub fn new(k0: f64, gamma: f64) -> Result<Self> {
        if !(k0 >= 0.0 && gamma >= 0.0) {
            return Err(Error::Validation(format!(
                "material parameters must be nonnegative, got k0={k0} gamma={gamma}"
            )));
        }
        Ok(MaterialParams { k0, gamma })
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams { k0: 0.2, gamma: 0.2 }
    }
}

pub fn frame_2d(jet: &Jet2D) -> Result<Frame2D> {
    let n = jet.d1.norm();
    if !(n > DEGENERATE_THRESHOLD) {
        return Err(Error::DegenerateJet(format!("tangent norm {n:e}")));
    }
    let t = jet.d1 / n;
    Ok(Frame2D {
        tangent: t,
        normal: Vector2::new(-t.y, t.x),
    })
}

/// Linear-tension fiber force `K0 ∂²x/∂λ²`.
pub fn fiber_force_2d(jet: &Jet2D, params: &MaterialParams) -> Vector2<f64> {
    jet.d2 * params.k0
}

pub fn frame_3d(jet: &Jet3D) -> Result<Frame3D> {
    let cross = jet.d_lambda.cross(&jet.d_theta);
    let n = cross.norm();
    if !(n > DEGENERATE_THRESHOLD) {
        return Err(Error::DegenerateJet(format!("tangent cross product norm {n:e}")));
    }
    Ok(Frame3D {
        tangent_lambda: jet.d_lambda / jet.d_lambda.norm(),
        tangent_theta: jet.d_theta / jet.d_theta.norm(),
        normal: cross / n,
    })
}

pub fn fundamental_forms(jet: &Jet3D, frame: &Frame3D) -> FundamentalForms {
    FundamentalForms {
        big_e: jet.d_lambda.dot(&jet.d_lambda),
        big_f: jet.d_lambda.dot(&jet.d_theta),
        big_g: jet.d_theta.dot(&jet.d_theta),
        e: jet.d_ll.dot(&frame.normal),
        f: jet.d_lt.dot(&frame.normal),
        g: jet.d_tt.dot(&frame.normal),
    }
}

/// `H = (eG − 2fF + gE) / (2(EG − F²))`.
pub fn mean_curvature(forms: &FundamentalForms) -> Result<f64> {
    let det = forms.first_determinant();
    if !(det > 1e-14) {
        return Err(Error::DegenerateJet(format!("first fundamental form determinant {det:e}")));
    }
    Ok((forms.e * forms.big_g - 2.0 * forms.f * forms.big_f + forms.g * forms.big_e) / (2.0 * det))
}

/// Surface tension force `γ (2H) η̂`.
pub fn surface_tension_force(jet: &Jet3D, params: &MaterialParams) -> Result<Vector3<f64>> {
    let frame = frame_3d(jet)?;
    let h = mean_curvature(&fundamental_forms(jet, &frame))?;
    Ok(frame.normal * (params.gamma * 2.0 * h))
}
