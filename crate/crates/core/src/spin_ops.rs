//! Spin-1/2 operator algebra, many-body embeddings, Hamiltonian and
//! thermal jump-operator builders.
//!
//! Basis convention: computational basis with site 1 as the most
//! significant bit and |↑⟩ ↦ bit 0, so index 0 is |↑↑…↑⟩ and index
//! 2^N − 1 is |↓↓…↓⟩. All operators are sparse (CSR); `to_dense` gives
//! the dense view.

use serde::{Deserialize, Serialize};

use crate::lattice::{FieldAssignment, LatticeSpec};
use crate::sparse::{kron, CsrMatrix};
use crate::{C64, Error, Result};

/// Single-site spin operator kinds, S^± = S^x ± iS^y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinOp {
    Sx,
    Sy,
    Sz,
    SPlus,
    SMinus,
}

/// Named anisotropy presets (γ, δ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnisotropyPreset {
    /// γ = 1, δ = 0.
    Ising,
    /// γ = 0, δ = 0.5.
    Xxx,
    /// γ = 0.5, δ = 1.
    Xyz,
}

impl AnisotropyPreset {
    pub fn gamma_delta(self) -> (f64, f64) {
        match self {
            AnisotropyPreset::Ising => (1.0, 0.0),
            AnisotropyPreset::Xxx => (0.0, 0.5),
            AnisotropyPreset::Xyz => (0.5, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AnisotropyPreset::Ising => "ising",
            AnisotropyPreset::Xxx => "xxx",
            AnisotropyPreset::Xyz => "xyz",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ising" => Some(AnisotropyPreset::Ising),
            "xxx" => Some(AnisotropyPreset::Xxx),
            "xyz" => Some(AnisotropyPreset::Xyz),
            _ => None,
        }
    }
}

/// Model parameters in units of ω (ħ = k_B = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// xy anisotropy γ.
    pub gamma: f64,
    /// z anisotropy δ.
    pub delta: f64,
    /// Exchange coupling J.
    pub exchange: f64,
    /// Frequency scale ω (the maximum field strength).
    pub omega: f64,
    /// System–bath coupling Γ.
    pub bath_coupling: f64,
    /// Mean thermal occupation n̄ of the bath.
    pub nbar: f64,
    /// Field strength at border sites.
    pub b1: f64,
    /// Field strength at the central site.
    pub b2: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        // Γ = J = 0.05·ω, ω = 1
        Self {
            gamma: 1.0,
            delta: 0.0,
            exchange: 0.05,
            omega: 1.0,
            bath_coupling: 0.05,
            nbar: 0.0,
            b1: 1.0,
            b2: 1.0,
        }
    }
}

impl ModelParams {
    pub fn with_preset(preset: AnisotropyPreset) -> Self {
        let (gamma, delta) = preset.gamma_delta();
        Self { gamma, delta, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(Error::InvalidParams(format!("omega must be > 0, got {}", self.omega)));
        }
        if self.bath_coupling < 0.0 {
            return Err(Error::InvalidParams(format!(
                "bath coupling must be >= 0, got {}",
                self.bath_coupling
            )));
        }
        if self.nbar < 0.0 {
            return Err(Error::InvalidParams(format!("nbar must be >= 0, got {}", self.nbar)));
        }
        for (name, v) in [("b1", self.b1), ("b2", self.b2)] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

fn two_by_two(kind: SpinOp) -> CsrMatrix {
    let z = C64::new(0.0, 0.0);
    let entries: [[C64; 2]; 2] = match kind {
        SpinOp::Sz => [[C64::new(0.5, 0.0), z], [z, C64::new(-0.5, 0.0)]],
        SpinOp::SPlus => [[z, C64::new(1.0, 0.0)], [z, z]],
        SpinOp::SMinus => [[z, z], [C64::new(1.0, 0.0), z]],
        SpinOp::Sx => [[z, C64::new(0.5, 0.0)], [C64::new(0.5, 0.0), z]],
        SpinOp::Sy => [[z, C64::new(0.0, -0.5)], [C64::new(0.0, 0.5), z]],
    };
    let mut trips = Vec::new();
    for (r, row) in entries.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v != z {
                trips.push((r, c, v));
            }
        }
    }
    CsrMatrix::from_triplets(2, 2, trips)
}

/// Embeds the single-site operator `kind` at `site` (1-based) into the
/// 2^N-dimensional many-body space.
pub fn site_operator(kind: SpinOp, site: usize, n_sites: usize) -> Result<CsrMatrix> {
    if site < 1 || site > n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    let left = CsrMatrix::identity(1 << (site - 1));
    let right = CsrMatrix::identity(1 << (n_sites - site));
    Ok(kron(&kron(&left, &two_by_two(kind)), &right))
}

/// Builds the XYZ Hamiltonian with inhomogeneous z-field:
/// H = Σ_edges [ (1+γ)/2·J SxSx + (1−γ)/2·J SySy + δJ SzSz ] + Σ_i h_i Sz_i.
pub fn build_hamiltonian(
    params: &ModelParams,
    lattice: &LatticeSpec,
    fields: &FieldAssignment,
) -> Result<CsrMatrix> {
    params.validate()?;
    let n = lattice.n_sites();
    if fields.n_sites() != n {
        return Err(Error::DimensionMismatch { expected: n, got: fields.n_sites() });
    }
    let dim = 1usize << n;
    let j = params.exchange;
    let cx = C64::new((1.0 + params.gamma) / 2.0 * j, 0.0);
    let cy = C64::new((1.0 - params.gamma) / 2.0 * j, 0.0);
    let cz = C64::new(params.delta * j, 0.0);

    let sx: Vec<CsrMatrix> = (1..=n).map(|i| site_operator(SpinOp::Sx, i, n)).collect::<Result<_>>()?;
    let sy: Vec<CsrMatrix> = (1..=n).map(|i| site_operator(SpinOp::Sy, i, n)).collect::<Result<_>>()?;
    let sz: Vec<CsrMatrix> = (1..=n).map(|i| site_operator(SpinOp::Sz, i, n)).collect::<Result<_>>()?;

    let mut h = CsrMatrix::zeros(dim, dim);
    for &(a, b) in lattice.edges() {
        h = h.add_scaled(&sx[a - 1].matmul(&sx[b - 1]), cx);
        h = h.add_scaled(&sy[a - 1].matmul(&sy[b - 1]), cy);
        h = h.add_scaled(&sz[a - 1].matmul(&sz[b - 1]), cz);
    }
    for i in 1..=n {
        h = h.add_scaled(&sz[i - 1], C64::new(fields.strength(i), 0.0));
    }
    debug_assert!(h.herm_residual() < 1e-12);
    Ok(h)
}

/// Thermal jump operators: the N lowering operators √(Γ(n̄+1))·S_k⁻
/// followed by the N raising operators √(Γ·n̄)·S_k⁺ (2N in total; the
/// raising family is identically zero at n̄ = 0).
pub fn build_lindblad_ops(params: &ModelParams, n_sites: usize) -> Result<Vec<CsrMatrix>> {
    params.validate()?;
    let down = (params.bath_coupling * (params.nbar + 1.0)).sqrt();
    let up = (params.bath_coupling * params.nbar).sqrt();
    let mut ops = Vec::with_capacity(2 * n_sites);
    for k in 1..=n_sites {
        ops.push(site_operator(SpinOp::SMinus, k, n_sites)?.scaled(C64::new(down, 0.0)));
    }
    for k in 1..=n_sites {
        let mut op = site_operator(SpinOp::SPlus, k, n_sites)?;
        if up == 0.0 {
            op = CsrMatrix::zeros(op.nrows(), op.ncols());
        } else {
            op.scale(C64::new(up, 0.0));
        }
        ops.push(op);
    }
    Ok(ops)
}
