//! The full beam-Doppler transformation basis and the fixed
//! localized-processing (LP) region selectors.
//!
//! The basis collects every DFT shift of the target space-time steering
//! vector: column `(k, m)` is the steering vector at Doppler offset `k/N` and
//! beam offset `m/M` from the target frequencies. The shifted-DFT columns are
//! mutually orthogonal with squared norm NM, so the target column is the main
//! channel and the remaining NM-1 columns are the auxiliary channels of a
//! generalized sidelobe canceller.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scene::{space_time_steering, RadarConfig};
use crate::{CMatrix, CVector};

/// Beam-Doppler basis anchored at a target cell.
#[derive(Debug, Clone)]
pub struct BeamDopplerBasis {
    target: CVector,
    aux: CMatrix,
    full: CMatrix,
    target_fs: f64,
    target_fd: f64,
    num_elements: usize,
    num_pulses: usize,
}

impl BeamDopplerBasis {
    /// Builds the NM x NM transform `[s | T_aux]` for a target at
    /// `(target_fs, target_fd)`.
    ///
    /// Auxiliary columns are ordered by Doppler offset `k = 0..N-1`, beam
    /// offsets ascending within each `k`, skipping the target cell `(0, 0)`.
    pub fn build(target_fs: f64, target_fd: f64, config: &RadarConfig) -> Self {
        let m_count = config.num_elements;
        let n_count = config.num_pulses;
        let nm = m_count * n_count;

        let mut full = CMatrix::zeros(nm, nm);
        let mut aux = CMatrix::zeros(nm, nm - 1);
        let mut target = CVector::zeros(nm);

        for k in 0..n_count {
            for m in 0..m_count {
                let col = space_time_steering(
                    target_fs + m as f64 / m_count as f64,
                    target_fd + k as f64 / n_count as f64,
                    config,
                );
                if k == 0 && m == 0 {
                    target = col.clone();
                    full.set_column(0, &col);
                } else {
                    let j = k * m_count + m - 1;
                    aux.set_column(j, &col);
                    full.set_column(j + 1, &col);
                }
            }
        }

        Self {
            target,
            aux,
            full,
            target_fs,
            target_fd,
            num_elements: m_count,
            num_pulses: n_count,
        }
    }

    /// Target space-time steering vector `s` (the main channel).
    pub fn target_steering(&self) -> &CVector {
        &self.target
    }

    /// The NM x (NM-1) auxiliary-channel matrix.
    pub fn aux_matrix(&self) -> &CMatrix {
        &self.aux
    }

    /// The full transform `[s | T_aux]`.
    pub fn full_matrix(&self) -> &CMatrix {
        &self.full
    }

    pub fn num_beams(&self) -> usize {
        self.num_elements
    }

    pub fn num_dopplers(&self) -> usize {
        self.num_pulses
    }

    pub fn dof(&self) -> usize {
        self.num_elements * self.num_pulses
    }

    pub fn target_fs(&self) -> f64 {
        self.target_fs
    }

    pub fn target_fd(&self) -> f64 {
        self.target_fd
    }

    /// Auxiliary column index of offsets `(doppler, beam)`; `None` for the
    /// target cell or out-of-range offsets.
    pub fn aux_index(&self, doppler_offset: usize, beam_offset: usize) -> Option<usize> {
        if doppler_offset >= self.num_pulses || beam_offset >= self.num_elements {
            return None;
        }
        if doppler_offset == 0 && beam_offset == 0 {
            return None;
        }
        Some(doppler_offset * self.num_elements + beam_offset - 1)
    }

    /// Inverse of [`aux_index`](Self::aux_index): offsets `(doppler, beam)`
    /// of auxiliary column `index`.
    pub fn aux_offsets(&self, index: usize) -> (usize, usize) {
        assert!(index < self.dof() - 1, "auxiliary index out of range");
        let flat = index + 1;
        (flat / self.num_elements, flat % self.num_elements)
    }

    /// Basis column for arbitrary offsets reduced modulo the grid.
    pub fn column_for_offsets(&self, doppler_offset: i64, beam_offset: i64) -> CVector {
        let (k, m) = self.reduce_offsets(doppler_offset, beam_offset);
        if k == 0 && m == 0 {
            self.target.clone()
        } else {
            let j = self.aux_index(k, m).expect("reduced offsets in range");
            self.aux.column(j).into_owned()
        }
    }

    /// Reduces signed offsets into `(0..N, 0..M)`.
    pub fn reduce_offsets(&self, doppler_offset: i64, beam_offset: i64) -> (usize, usize) {
        let n = self.num_pulses as i64;
        let m = self.num_elements as i64;
        (
            doppler_offset.rem_euclid(n) as usize,
            beam_offset.rem_euclid(m) as usize,
        )
    }

    /// Main-channel output `d = s^H x`.
    pub fn main_channel(&self, x: &CVector) -> Complex64 {
        assert_eq!(x.len(), self.dof(), "snapshot length must equal NM");
        self.target.dotc(x)
    }

    /// Auxiliary-channel outputs `T_aux^H X` for a batch of snapshots.
    pub fn aux_channels(&self, x: &CMatrix) -> CMatrix {
        assert_eq!(x.nrows(), self.dof(), "snapshot length must equal NM");
        self.aux.adjoint() * x
    }
}

/// A localized-processing region: a subset of beam-Doppler cells plus the
/// matching selection matrix.
#[derive(Debug, Clone)]
pub struct LpRegion {
    cells: Vec<(usize, usize)>,
    selection: CMatrix,
}

impl LpRegion {
    /// The selected `(doppler_offset, beam_offset)` cells, reduced modulo the
    /// grid, in selection order without duplicates.
    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    /// NM x D matrix of the corresponding basis columns.
    pub fn selection_matrix(&self) -> &CMatrix {
        &self.selection
    }

    /// Number of selected cells D.
    pub fn dimension(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, doppler_offset: usize, beam_offset: usize) -> bool {
        self.cells.contains(&(doppler_offset, beam_offset))
    }

    /// Builds a custom region from signed offsets; offsets are reduced
    /// modulo the grid and duplicates are dropped (first occurrence wins).
    pub fn from_offsets<I>(basis: &BeamDopplerBasis, offsets: I) -> Self
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        let mut cells: Vec<(usize, usize)> = Vec::new();
        for (k, m) in offsets {
            let reduced = basis.reduce_offsets(k, m);
            if !cells.contains(&reduced) {
                cells.push(reduced);
            }
        }
        let mut selection = CMatrix::zeros(basis.dof(), cells.len());
        for (j, &(k, m)) in cells.iter().enumerate() {
            selection.set_column(j, &basis.column_for_offsets(k as i64, m as i64));
        }
        Self { cells, selection }
    }
}

/// Rectangular JDL region of `n_dopplers x n_beams` cells centered on the
/// target. Both sizes must be odd so the block is symmetric.
pub fn jdl_region(
    basis: &BeamDopplerBasis,
    n_beams: usize,
    n_dopplers: usize,
) -> Result<LpRegion> {
    if n_beams == 0 || n_dopplers == 0 || n_beams % 2 == 0 || n_dopplers % 2 == 0 {
        return Err(Error::invalid(format!(
            "JDL block sizes must be odd and positive, got {n_dopplers} x {n_beams}"
        )));
    }
    if n_beams > basis.num_beams() || n_dopplers > basis.num_dopplers() {
        return Err(Error::invalid(format!(
            "JDL block {n_dopplers} x {n_beams} exceeds the {} x {} grid",
            basis.num_dopplers(),
            basis.num_beams()
        )));
    }
    let hb = (n_beams / 2) as i64;
    let hd = (n_dopplers / 2) as i64;
    let offsets = (-hd..=hd).flat_map(|k| (-hb..=hb).map(move |m| (k, m)));
    Ok(LpRegion::from_offsets(basis, offsets))
}

/// Cross-shaped STMB region: `n_doppler_arm` cells along the Doppler axis,
/// `n_beam_arm` cells along the beam axis (split evenly on both sides), plus
/// the target cell. Arm counts must be even.
pub fn stmb_region(
    basis: &BeamDopplerBasis,
    n_doppler_arm: usize,
    n_beam_arm: usize,
) -> Result<LpRegion> {
    if n_doppler_arm % 2 != 0 || n_beam_arm % 2 != 0 {
        return Err(Error::invalid(format!(
            "STMB arm counts must be even, got {n_doppler_arm} + {n_beam_arm}"
        )));
    }
    if n_doppler_arm >= basis.num_dopplers() || n_beam_arm >= basis.num_beams() {
        return Err(Error::invalid(format!(
            "STMB arms {n_doppler_arm} + {n_beam_arm} exceed the {} x {} grid",
            basis.num_dopplers(),
            basis.num_beams()
        )));
    }
    let hd = (n_doppler_arm / 2) as i64;
    let hb = (n_beam_arm / 2) as i64;
    let mut offsets = vec![(0i64, 0i64)];
    for k in 1..=hd {
        offsets.push((-k, 0));
        offsets.push((k, 0));
    }
    for m in 1..=hb {
        offsets.push((0, -m));
        offsets.push((0, m));
    }
    Ok(LpRegion::from_offsets(basis, offsets))
}

/// Ridge-aligned ACR region: walking Doppler bins outward from the target,
/// each bin contributes the beam cell closest to the clutter ridge
/// `f_d = beta * f_s` (relative to the target cell), until `num_cells` cells
/// are collected.
pub fn acr_region(basis: &BeamDopplerBasis, beta: f64, num_cells: usize) -> Result<LpRegion> {
    if !beta.is_finite() {
        return Err(Error::invalid(format!(
            "ridge slope must be finite, got {beta}"
        )));
    }
    if num_cells == 0 || num_cells > basis.dof() {
        return Err(Error::invalid(format!(
            "num_cells must be in 1..={}, got {num_cells}",
            basis.dof()
        )));
    }
    if beta == 0.0 && num_cells > basis.num_dopplers() {
        return Err(Error::invalid(
            "zero ridge slope supports at most one cell per Doppler bin".to_string(),
        ));
    }

    let n = basis.num_dopplers() as i64;
    let m = basis.num_beams() as f64;

    // Doppler bins ordered by distance from the target: 0, 1, -1, 2, -2, ...
    let mut bins = vec![0i64];
    let mut step = 1i64;
    while (bins.len() as i64) < n {
        bins.push(step);
        if (bins.len() as i64) < n {
            bins.push(-step);
        }
        step += 1;
    }

    let mut offsets = Vec::new();
    for &k in &bins {
        let beam = if beta == 0.0 {
            // Degenerate ridge: all clutter sits at zero Doppler offset, so
            // only the target beam column is meaningful.
            0
        } else {
            (m * k as f64 / (basis.num_dopplers() as f64 * beta)).round() as i64
        };
        offsets.push((k, beam));
        if offsets.len() >= num_cells {
            break;
        }
    }

    Ok(LpRegion::from_offsets(basis, offsets))
}
