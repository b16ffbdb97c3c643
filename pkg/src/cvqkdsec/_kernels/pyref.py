"""Pure-numpy reference kernel; semantics mirror the compiled version.

The transform arithmetic uses the same elementary operations in the same
order as the C loop, so clip decisions, bin indices, and histograms agree
bit for bit; only the floating accumulation order differs (pairwise here,
serial there), which perturbs the moment sums at the last-ulp level.
"""

from __future__ import annotations

import numpy as np

from . import layout as L


def _adc_bins(x, r, step, d):
    t = np.ceil((x + r) / step).astype(np.int64)
    np.clip(t, 1, d - 2, out=t)
    t[x <= -r] = 0
    t[x > r] = d - 1
    return t


def accumulate_rounds(q_a, p_a, z1, z2, sqrt_eta, sigma, m_range,
                      r_adc, delta_adc, d_adc, discard_clipped):
    """Process one chunk of rounds; returns (hist, sums, clip_count, kept)."""
    qb_raw = (sqrt_eta * q_a) + (sigma * z1)
    pb_raw = (sqrt_eta * p_a) + (sigma * z2)

    clipped = ((qb_raw > m_range) | (qb_raw < -m_range)
               | (pb_raw > m_range) | (pb_raw < -m_range))
    clip_count = int(clipped.sum())
    in_range = ~clipped

    sums = np.zeros(L.NSUMS)
    rq, rp = qb_raw[in_range], pb_raw[in_range]
    ra_q, ra_p = q_a[in_range], p_a[in_range]
    q2 = rq * rq
    sums[L.S_R_QB2] = q2.sum()
    sums[L.S_R_QB4] = (q2 * q2).sum()
    cr = ra_q * rq
    sums[L.S_R_QAQB] = cr.sum()
    sums[L.S_R_QAQB2] = (cr * cr).sum()
    p2 = rp * rp
    sums[L.S_R_PB2] = p2.sum()
    sums[L.S_R_PB4] = (p2 * p2).sum()
    cr = ra_p * rp
    sums[L.S_R_PAPB] = cr.sum()
    sums[L.S_R_PAPB2] = (cr * cr).sum()

    if discard_clipped:
        keep = in_range
        qa, pa = q_a[keep], p_a[keep]
        qb = qb_raw[keep]
        pb = pb_raw[keep]
        raw_q, raw_p = qb, pb
    else:
        qa, pa = q_a, p_a
        qb = np.clip(qb_raw, -m_range, m_range)
        pb = np.clip(pb_raw, -m_range, m_range)
        raw_q, raw_p = qb_raw, pb_raw
    kept = qa.size

    jq = _adc_bins(raw_q, r_adc, delta_adc, d_adc)
    jp = _adc_bins(raw_p, r_adc, delta_adc, d_adc)
    hist = np.bincount(jq * d_adc + jp, minlength=d_adc * d_adc).astype(np.int64)

    sums[L.S_QA] = qa.sum()
    sums[L.S_PA] = pa.sum()
    sums[L.S_QB] = qb.sum()
    sums[L.S_PB] = pb.sum()
    sums[L.S_QAQA] = (qa * qa).sum()
    sums[L.S_QAPA] = (qa * pa).sum()
    sums[L.S_QAQB] = (qa * qb).sum()
    sums[L.S_QAPB] = (qa * pb).sum()
    sums[L.S_PAPA] = (pa * pa).sum()
    sums[L.S_PAQB] = (pa * qb).sum()
    sums[L.S_PAPB] = (pa * pb).sum()
    sums[L.S_QBQB] = (qb * qb).sum()
    sums[L.S_QBPB] = (qb * pb).sum()
    sums[L.S_PBPB] = (pb * pb).sum()

    return hist, sums, clip_count, int(kept)
