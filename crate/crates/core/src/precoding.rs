//! The six linear precoders.
//!
//! Every column is scaled so that its expected squared norm over channel and
//! estimation draws equals the allocated power. Unicast matrices hold one
//! column per user (flat index ν); multicast matrices hold one per group.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::config::{GroupLayout, SchemeId};
use crate::error::{Error, Result};
use crate::estimation::{CpEstimate, DpEstimate, Estimate};
use crate::linalg::{column_basis, project_out, zf_directions};
use crate::power::DlPowers;

#[derive(Debug, Clone)]
pub struct PrecodingMatrix {
    pub scheme: SchemeId,
    pub columns: DMatrix<Complex64>,
    pub allocated_powers: Vec<f64>,
    pub layout: GroupLayout,
}

impl PrecodingMatrix {
    /// Column holding user (group, user) of a unicast precoder.
    pub fn column_index(&self, group: usize, user: usize) -> usize {
        debug_assert!(self.scheme.is_unicast());
        self.layout.index(group, user)
    }

    /// The vector multiplying each group's symbol s_j.
    ///
    /// Unicast columns of one group all carry the same symbol, so they add up.
    pub fn stream_precoders(&self) -> DMatrix<Complex64> {
        if !self.scheme.is_unicast() {
            return self.columns.clone();
        }
        let mut out = DMatrix::zeros(self.columns.nrows(), self.layout.n_groups());
        for (j, range) in self.layout.groups() {
            let mut acc = DVector::<Complex64>::zeros(self.columns.nrows());
            for col in range {
                acc += self.columns.column(col);
            }
            out.set_column(j, &acc);
        }
        out
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

/// Scale √(p / (dof γ)) with a zero column for zero power.
fn mrt_scale(column: usize, power: f64, gamma: f64, dof: f64) -> Result<f64> {
    if power == 0.0 {
        return Ok(0.0);
    }
    if !(gamma > 0.0) {
        return Err(Error::ZeroEstimate { column, power });
    }
    Ok((power / (dof * gamma)).sqrt())
}

pub fn mrt_undp(est: &DpEstimate, dl_powers: &[f64]) -> Result<PrecodingMatrix> {
    let k = est.layout.total_users();
    check_len("downlink powers", k, dl_powers.len())?;
    let n = est.n_antennas() as f64;
    let mut columns = DMatrix::zeros(est.n_antennas(), k);
    for col in 0..k {
        let s = mrt_scale(col, dl_powers[col], est.gamma[col], n)?;
        columns.set_column(col, &(est.g_hat.column(col) * Complex64::from(s)));
    }
    Ok(PrecodingMatrix {
        scheme: SchemeId::MrtUndp,
        columns,
        allocated_powers: dl_powers.to_vec(),
        layout: est.layout.clone(),
    })
}

pub fn zf_undp(est: &DpEstimate, dl_powers: &[f64], n_antennas: usize) -> Result<PrecodingMatrix> {
    let k = est.layout.total_users();
    check_len("downlink powers", k, dl_powers.len())?;
    check_len("antennas", n_antennas, est.n_antennas())?;
    if n_antennas <= k {
        return Err(Error::Infeasible {
            scheme: SchemeId::ZfUndp,
            reason: crate::config::Infeasible::TooFewAntennas {
                n_antennas,
                nulled: k,
            },
        });
    }
    let dirs = zf_directions(&est.g_hat)?;
    let dof = (n_antennas - k) as f64;
    let mut columns = dirs;
    for col in 0..k {
        let s = (dl_powers[col] * est.gamma[col] * dof).sqrt();
        columns.column_mut(col).scale_mut(s);
    }
    Ok(PrecodingMatrix {
        scheme: SchemeId::ZfUndp,
        columns,
        allocated_powers: dl_powers.to_vec(),
        layout: est.layout.clone(),
    })
}

/// Σ_k √(p_jk/(dof γ_jk)) ĝ_jk over one group, summed in user order.
fn weighted_group_sum(est: &DpEstimate, dl_powers: &[f64], group: usize, dof: f64) -> Result<DVector<Complex64>> {
    let mut acc = DVector::<Complex64>::zeros(est.n_antennas());
    for col in est.layout.range(group) {
        let s = mrt_scale(col, dl_powers[col], est.gamma[col], dof)?;
        acc += est.g_hat.column(col) * Complex64::from(s);
    }
    Ok(acc)
}

fn group_sums(layout: &GroupLayout, dl_powers: &[f64]) -> Vec<f64> {
    layout.groups().map(|(_, r)| dl_powers[r].iter().sum()).collect()
}

pub fn mrt_mudp(est: &DpEstimate, dl_powers: &[f64]) -> Result<PrecodingMatrix> {
    check_len("downlink powers", est.layout.total_users(), dl_powers.len())?;
    let n = est.n_antennas() as f64;
    let g = est.layout.n_groups();
    let mut columns = DMatrix::zeros(est.n_antennas(), g);
    for j in 0..g {
        columns.set_column(j, &weighted_group_sum(est, dl_powers, j, n)?);
    }
    Ok(PrecodingMatrix {
        scheme: SchemeId::MrtMudp,
        columns,
        allocated_powers: group_sums(&est.layout, dl_powers),
        layout: est.layout.clone(),
    })
}

pub fn zf_mudp(est: &DpEstimate, dl_powers: &[f64], n_antennas: usize) -> Result<PrecodingMatrix> {
    let layout = &est.layout;
    check_len("downlink powers", layout.total_users(), dl_powers.len())?;
    check_len("antennas", n_antennas, est.n_antennas())?;
    let g = layout.n_groups();
    let mut columns = DMatrix::zeros(n_antennas, g);
    for (j, range) in layout.groups() {
        let nulled = layout.total_users() - range.len();
        if n_antennas <= nulled {
            return Err(Error::Infeasible {
                scheme: SchemeId::ZfMudp,
                reason: crate::config::Infeasible::TooFewAntennas { n_antennas, nulled },
            });
        }
        let others: Vec<usize> = (0..layout.total_users()).filter(|c| !range.contains(c)).collect();
        let g_minus = est.g_hat.select_columns(&others);
        let v = weighted_group_sum(est, dl_powers, j, (n_antennas - nulled) as f64)?;
        let w = if others.is_empty() {
            v
        } else {
            project_out(&column_basis(&g_minus)?, &v)
        };
        columns.set_column(j, &w);
    }
    Ok(PrecodingMatrix {
        scheme: SchemeId::ZfMudp,
        columns,
        allocated_powers: group_sums(layout, dl_powers),
        layout: layout.clone(),
    })
}

pub fn mrt_mucp(est: &CpEstimate, dl_group_powers: &[f64]) -> Result<PrecodingMatrix> {
    let g = est.layout.n_groups();
    check_len("downlink powers", g, dl_group_powers.len())?;
    let n = est.n_antennas() as f64;
    let mut columns = DMatrix::zeros(est.n_antennas(), g);
    for j in 0..g {
        let s = mrt_scale(j, dl_group_powers[j], est.gamma_group[j], n)?;
        columns.set_column(j, &(est.g_hat_group.column(j) * Complex64::from(s)));
    }
    Ok(PrecodingMatrix {
        scheme: SchemeId::MrtMucp,
        columns,
        allocated_powers: dl_group_powers.to_vec(),
        layout: est.layout.clone(),
    })
}

pub fn zf_mucp(est: &CpEstimate, dl_group_powers: &[f64], n_antennas: usize) -> Result<PrecodingMatrix> {
    let g = est.layout.n_groups();
    check_len("downlink powers", g, dl_group_powers.len())?;
    check_len("antennas", n_antennas, est.n_antennas())?;
    if n_antennas <= g {
        return Err(Error::Infeasible {
            scheme: SchemeId::ZfMucp,
            reason: crate::config::Infeasible::TooFewAntennas {
                n_antennas,
                nulled: g,
            },
        });
    }
    let dof = (n_antennas - g) as f64;
    let mut columns = zf_directions(&est.g_hat_group)?;
    for j in 0..g {
        let s = (dl_group_powers[j] * est.gamma_group[j] * dof).sqrt();
        columns.column_mut(j).scale_mut(s);
    }
    Ok(PrecodingMatrix {
        scheme: SchemeId::ZfMucp,
        columns,
        allocated_powers: dl_group_powers.to_vec(),
        layout: est.layout.clone(),
    })
}

/// Builds `scheme`'s precoder from a matching estimate.
pub fn build_precoder(scheme: SchemeId, est: &Estimate, dl: &DlPowers) -> Result<PrecodingMatrix> {
    let mismatch = || Error::PilotStrategyMismatch {
        scheme,
        expected: if scheme.dedicated_pilots() {
            "dedicated-pilot"
        } else {
            "co-pilot"
        },
    };
    match (est, dl) {
        (Estimate::Dedicated(e), DlPowers::PerUser(p)) => match scheme {
            SchemeId::MrtUndp => mrt_undp(e, p),
            SchemeId::ZfUndp => zf_undp(e, p, e.n_antennas()),
            SchemeId::MrtMudp => mrt_mudp(e, p),
            SchemeId::ZfMudp => zf_mudp(e, p, e.n_antennas()),
            _ => Err(mismatch()),
        },
        (Estimate::CoPilot(e), DlPowers::PerGroup(p)) => match scheme {
            SchemeId::MrtMucp => mrt_mucp(e, p),
            SchemeId::ZfMucp => zf_mucp(e, p, e.n_antennas()),
            _ => Err(mismatch()),
        },
        _ => Err(mismatch()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channels, FadingProfile};
    use crate::estimation::{estimate_cp, estimate_dp};

    fn dp(groups: Vec<usize>, n: usize, seed: u64) -> DpEstimate {
        let k: usize = groups.iter().sum();
        let betas: Vec<f64> = (0..k).map(|i| 0.5 + 0.25 * i as f64).collect();
        let prof = FadingProfile::from_betas(groups, betas).unwrap();
        let r = draw_channels(&prof, n, seed);
        estimate_dp(&r, &vec![1.0; k], k.max(1), seed + 1).unwrap()
    }

    #[test]
    fn zero_power_zero_column() {
        let e = dp(vec![2], 6, 1);
        let w = mrt_undp(&e, &[0.0, 2.0]).unwrap();
        assert_eq!(w.columns.column(0).norm(), 0.0);
        assert!(w.columns.column(1).norm() > 0.0);
    }

    #[test]
    fn zero_gamma_with_power_fails() {
        let prof = FadingProfile::from_betas(vec![2], vec![1.0, 1.0]).unwrap();
        let r = draw_channels(&prof, 4, 1);
        let e = estimate_dp(&r, &[0.0, 1.0], 2, 2).unwrap();
        assert!(matches!(mrt_undp(&e, &[1.0, 1.0]), Err(Error::ZeroEstimate { column: 0, .. })));
        assert!(mrt_undp(&e, &[0.0, 1.0]).is_ok());
    }

    #[test]
    fn scalar_mrt() {
        let e = dp(vec![1], 1, 3);
        let w = mrt_undp(&e, &[4.0]).unwrap();
        let expect = e.g_hat[(0, 0)] * (4.0 / e.gamma[0]).sqrt();
        assert!((w.columns[(0, 0)] - expect).norm() < 1e-14 * expect.norm());
    }

    #[test]
    fn single_user_zf_is_matched_filter_direction() {
        let e = dp(vec![1], 8, 4);
        let zf = zf_undp(&e, &[1.0], 8).unwrap();
        let mrt = mrt_undp(&e, &[1.0]).unwrap();
        let a = zf.columns.column(0);
        let b = mrt.columns.column(0);
        let cos = a.dotc(&b).norm() / (a.norm() * b.norm());
        assert!((cos - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zf_undp_nulls_other_users() {
        let e = dp(vec![2, 3], 12, 5);
        let p = [1.0, 2.0, 0.5, 1.5, 3.0];
        let w = zf_undp(&e, &p, 12).unwrap();
        let gram = e.g_hat.ad_mul(&w.columns);
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    let rel = gram[(i, j)].norm() / (e.g_hat.column(i).norm() * w.columns.column(j).norm());
                    assert!(rel < 1e-8, "{rel}");
                }
            }
            let self_term = (p[i] * e.gamma[i] * 7.0).sqrt();
            assert!((gram[(i, i)].re - self_term).abs() < 1e-10 * self_term);
        }
    }

    #[test]
    fn zf_needs_more_antennas_than_users() {
        let e = dp(vec![2, 2], 4, 1);
        assert!(matches!(zf_undp(&e, &[1.0; 4], 4), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn mrt_mudp_is_the_sum_of_unicast_columns() {
        let e = dp(vec![3, 1, 2], 9, 6);
        let p = [1.0, 0.2, 3.0, 0.7, 0.0, 1.1];
        let uni = mrt_undp(&e, &p).unwrap();
        let multi = mrt_mudp(&e, &p).unwrap();
        assert_eq!(uni.stream_precoders(), multi.columns);
        for (got, want) in multi.allocated_powers.iter().zip([4.2, 0.7, 1.1]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn zf_mudp_nulls_other_groups_and_reduces_to_mrt_for_one_group() {
        let e = dp(vec![2, 3, 2], 10, 7);
        let p = [1.0, 0.5, 2.0, 1.0, 0.3, 0.9, 1.4];
        let w = zf_mudp(&e, &p, 10).unwrap();
        for user in 0..7 {
            let own = e.layout.group_of(user);
            for j in 0..3 {
                if j != own {
                    let ip = e.g_hat.column(user).dotc(&w.columns.column(j)).norm();
                    assert!(ip < 1e-8 * e.g_hat.column(user).norm() * w.columns.column(j).norm());
                }
            }
        }

        let e = dp(vec![4], 6, 8);
        let p = [1.0, 2.0, 0.0, 0.5];
        assert_eq!(zf_mudp(&e, &p, 6).unwrap().columns, mrt_mudp(&e, &p).unwrap().columns);
    }

    #[test]
    fn zf_mucp_nulls_other_groups_through_collinearity() {
        let betas = vec![1.0, 0.4, 2.0, 0.9, 1.2, 0.3];
        let ul = vec![0.5, 1.0, 0.2, 0.8, 0.6, 1.0];
        let prof = FadingProfile::from_betas(vec![2, 3, 1], betas).unwrap();
        let r = draw_channels(&prof, 8, 1);
        let e = estimate_cp(&r, &ul, 3, 2).unwrap();
        let w = zf_mucp(&e, &[1.0, 2.0, 3.0], 8).unwrap();
        for user in 0..6 {
            let own = e.layout.group_of(user);
            for j in 0..3 {
                let ip = e.g_hat_user.column(user).dotc(&w.columns.column(j)).norm();
                let scale = e.g_hat_user.column(user).norm() * w.columns.column(j).norm();
                if j != own {
                    assert!(ip < 1e-8 * scale);
                } else {
                    assert!(ip > 1e-3 * scale);
                }
            }
        }
    }

    #[test]
    fn single_group_zf_mucp_is_collinear_with_mrt_mucp() {
        let prof = FadingProfile::from_betas(vec![3], vec![1.0, 0.5, 2.0]).unwrap();
        let r = draw_channels(&prof, 5, 3);
        let e = estimate_cp(&r, &[1.0; 3], 1, 4).unwrap();
        let a = zf_mucp(&e, &[2.0], 5).unwrap().columns;
        let b = mrt_mucp(&e, &[2.0]).unwrap().columns;
        let cos = a.column(0).dotc(&b.column(0)).norm() / (a.norm() * b.norm());
        assert!((cos - 1.0).abs() < 1e-12);
    }

    #[test]
    fn build_precoder_rejects_mismatched_inputs() {
        let e = Estimate::Dedicated(dp(vec![2], 4, 1));
        assert!(build_precoder(SchemeId::MrtMucp, &e, &DlPowers::PerUser(vec![1.0; 2])).is_err());
        assert!(build_precoder(SchemeId::MrtUndp, &e, &DlPowers::PerGroup(vec![1.0])).is_err());
        assert!(build_precoder(SchemeId::ZfUndp, &e, &DlPowers::PerUser(vec![1.0; 2])).is_ok());
    }
}
