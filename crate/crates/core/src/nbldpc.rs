//! Non-binary LDPC over GF(2^m) with extended min-sum decoding.
//!
//! Messages live in the log domain as truncated lists: the n_m best
//! candidate field elements with their log-likelihoods, everything else
//! represented by a single fill value. Check nodes combine messages through
//! elementary pairwise max-convolutions whose search is limited to a bubble
//! frontier of the sorted value grid, so the per-check cost scales with n_m
//! rather than with the field size.
//!
//! Conventions: natural log throughout; positive bit LLR means bit 0; the
//! dense symbol vector is indexed by the element's bit pattern (LSB first),
//! so entry 0 is the zero element and always carries LLR 0.

use crate::galois::{gf_add, FieldTables};
use crate::ldpc::{fail, AlistError, Scanner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Log-likelihood per field element, indexed by bit pattern.
pub type DenseLlr = Vec<f64>;

/// Sorted truncated log-domain message.
///
/// `vals` is non-increasing, `locs` holds the matching (pairwise distinct)
/// field elements, and every absent element is assumed to sit at `fill`,
/// which never exceeds the smallest kept value.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMsg {
    pub vals: Vec<f64>,
    pub locs: Vec<u8>,
    pub fill: f64,
}

impl TruncatedMsg {
    /// Value at a location, falling back to the fill.
    pub fn get(&self, loc: u8) -> f64 {
        match self.locs.iter().position(|&l| l == loc) {
            Some(i) => self.vals[i],
            None => self.fill,
        }
    }

    fn debug_check(&self) {
        debug_assert_eq!(self.vals.len(), self.locs.len());
        debug_assert!(self.vals.windows(2).all(|w| w[0] >= w[1]), "vals not sorted");
        debug_assert!(
            (1..self.locs.len()).all(|i| !self.locs[..i].contains(&self.locs[i])),
            "repeated location"
        );
        if let Some(&last) = self.vals.last() {
            debug_assert!(self.fill <= last, "fill {} above smallest kept {}", self.fill, last);
        }
    }
}

/// Decoded symbols plus how the attempt ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NbDecodeResult {
    pub symbols: Vec<u8>,
    pub iterations_used: usize,
    pub syndrome_ok: bool,
}

/// Sparse parity-check matrix over GF(q).
///
/// `rows[r]` lists (column, coefficient) with nonzero coefficients; `cols`
/// is the transposed view. Column degree is 2 for the codes the simulator
/// generates, but nothing below assumes it.
#[derive(Debug, Clone, PartialEq)]
pub struct NbPcm {
    pub m: usize,
    pub n: usize,
    pub field: FieldTables,
    pub rows: Vec<Vec<(usize, u8)>>,
    pub cols: Vec<Vec<(usize, u8)>>,
}

impl NbPcm {
    pub fn from_rows(
        m: usize,
        n: usize,
        field: FieldTables,
        rows: Vec<Vec<(usize, u8)>>,
    ) -> Self {
        assert_eq!(rows.len(), m);
        let mut cols = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &(c, h) in row {
                assert!(c < n && h != 0, "entry ({}, {}) = {}", r, c, h);
                cols[c].push((r, h));
            }
        }
        NbPcm { m, n, field, rows, cols }
    }

    /// All parity equations Σ_j h_ij ⊗ c_j = 0 hold.
    pub fn syndrome_ok(&self, symbols: &[u8]) -> bool {
        assert_eq!(symbols.len(), self.n);
        self.rows.iter().all(|row| {
            row.iter().fold(0u8, |s, &(c, h)| gf_add(s, self.field.mul(h, symbols[c]))) == 0
        })
    }

    pub fn dv_max(&self) -> usize {
        self.cols.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn dc_max(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Symbol from hard bit decisions packed LSB first.
pub fn bits_to_symbol(bits: &[u8]) -> u8 {
    assert!(bits.len() <= 8);
    bits.iter().enumerate().fold(0, |s, (b, &bit)| s | ((bit & 1) << b))
}

/// LSB-first bit expansion, m bits.
pub fn symbol_to_bits(sym: u8, m: u32) -> Vec<u8> {
    (0..m).map(|b| (sym >> b) & 1).collect()
}

/// Dense symbol LLRs from per-bit LLRs: element i collects −bit_llr[b] for
/// every set bit b of i, so entry 0 is 0 and the argmax equals the symbol
/// built from hard bit decisions.
pub fn bitllr_to_symbolllr(bit_llrs: &[f64], field: &FieldTables) -> DenseLlr {
    assert_eq!(bit_llrs.len(), field.m() as usize);
    (0..field.q())
        .map(|i| {
            bit_llrs
                .iter()
                .enumerate()
                .filter(|&(b, _)| i >> b & 1 == 1)
                .map(|(_, &l)| -l)
                .sum()
        })
        .collect()
}

/// Index of the largest entry, lowest element on ties.
pub fn hard_symbol(dense: &[f64]) -> u8 {
    let mut best = 0;
    for (i, &v) in dense.iter().enumerate().skip(1) {
        if v > dense[best] {
            best = i;
        }
    }
    best as u8
}

/// Keep the n_m largest entries (ties prefer the lower element index); the
/// fill for everything omitted is the largest omitted value minus
/// log(q − n_m) minus the offset. n_m = q keeps the whole message and pushes
/// the fill to −∞.
pub fn truncate_msg(dense: &[f64], n_m: usize, offset: f64) -> TruncatedMsg {
    let q = dense.len();
    assert!(n_m >= 1);
    let n_m = n_m.min(q);
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| dense[b].total_cmp(&dense[a]).then(a.cmp(&b)));
    let vals = order[..n_m].iter().map(|&i| dense[i]).collect();
    let locs = order[..n_m].iter().map(|&i| i as u8).collect();
    let fill = if n_m < q {
        dense[order[n_m]] - ((q - n_m) as f64).ln() - offset
    } else {
        f64::NEG_INFINITY
    };
    let out = TruncatedMsg { vals, locs, fill };
    out.debug_check();
    out
}

/// Relabel locations by β ↦ h ⊗ β. Values and their order are untouched.
pub fn permute_locs(msg: &TruncatedMsg, h: u8, field: &FieldTables) -> TruncatedMsg {
    assert_ne!(h, 0);
    let out = TruncatedMsg {
        vals: msg.vals.clone(),
        locs: msg.locs.iter().map(|&l| field.mul(h, l)).collect(),
        fill: msg.fill,
    };
    out.debug_check();
    out
}

/// Elementary check node: max-convolve two sorted messages over the XOR of
/// their locations, exploring only a bubble frontier of the value grid.
///
/// The frontier is L-shaped: the first ⌈bubbles/2⌉ rows and the first
/// ⌊bubbles/2⌋ columns of the (U × I) grid, merged in descending value
/// order (ties to the lower location). The first time a location surfaces
/// is its maximum within the frontier. With full-width messages and
/// bubbles = n_m the result equals the exhaustive pairwise maximum; smaller
/// frontiers trade accuracy for the 4-bubble operating cost.
///
/// The output fill is the first merged value that did not make the list
/// (a bound on every absent location within the frontier), or the smallest
/// kept value if the frontier was exhausted.
pub fn ecn_pair(u: &TruncatedMsg, i: &TruncatedMsg, n_m: usize, bubbles: usize) -> TruncatedMsg {
    let nu = u.locs.len();
    let ni = i.locs.len();
    assert!(nu > 0 && ni > 0 && n_m >= 1 && bubbles >= 1);
    let r = bubbles.div_ceil(2).min(nu);
    let c = (bubbles / 2).min(ni);
    // A stream is a cursor (j, k, along_row); row streams sweep k, column
    // streams sweep j starting below the row block so no cell repeats.
    let mut streams: Vec<(usize, usize, bool)> = (0..r).map(|j| (j, 0, true)).collect();
    if r < nu {
        streams.extend((0..c).map(|k| (r, k, false)));
    }
    let mut seen = [false; 256];
    let mut vals = Vec::with_capacity(n_m);
    let mut locs = Vec::with_capacity(n_m);
    let mut fill = None;
    while !streams.is_empty() {
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        let mut best_l = u8::MAX;
        for (s, &(j, k, _)) in streams.iter().enumerate() {
            let v = u.vals[j] + i.vals[k];
            let l = u.locs[j] ^ i.locs[k];
            if v > best_v || (v == best_v && l < best_l) {
                best = s;
                best_v = v;
                best_l = l;
            }
        }
        if vals.len() == n_m {
            fill = Some(best_v);
            break;
        }
        if !seen[best_l as usize] {
            seen[best_l as usize] = true;
            vals.push(best_v);
            locs.push(best_l);
        }
        let (j, k, along_row) = streams[best];
        let advanced = if along_row { (j, k + 1, true) } else { (j + 1, k, false) };
        if (along_row && advanced.1 < ni) || (!along_row && advanced.0 < nu) {
            streams[best] = advanced;
        } else {
            streams.swap_remove(best);
        }
    }
    let fill = fill.unwrap_or_else(|| *vals.last().expect("nonempty grid"));
    let out = TruncatedMsg { vals, locs, fill };
    out.debug_check();
    out
}

/// Variable-to-check message: channel LLRs plus the other edges' incoming
/// messages (fill-extended), re-truncated, then moved into the check domain
/// by scaling locations with the edge coefficient.
pub fn v2c(
    channel: &[f64],
    others: &[&TruncatedMsg],
    h: u8,
    n_m: usize,
    offset: f64,
    field: &FieldTables,
) -> TruncatedMsg {
    let mut dense = channel.to_vec();
    for msg in others {
        for (a, d) in dense.iter_mut().enumerate() {
            *d += msg.get(a as u8);
        }
    }
    permute_locs(&truncate_msg(&dense, n_m, offset), h, field)
}

/// Check node: for each of the d_c edges, combine the other d_c − 1 inputs
/// through forward/backward chains of elementary check nodes, then return
/// each output to the variable domain via the inverse coefficient.
/// Two edges need no combine at all: each side just receives the other.
pub fn c2v(
    inputs: &[TruncatedMsg],
    hs: &[u8],
    n_m: usize,
    bubbles: usize,
    field: &FieldTables,
) -> Vec<TruncatedMsg> {
    let d = inputs.len();
    assert_eq!(hs.len(), d);
    assert!(d >= 2, "degree-{} check", d);
    let outs: Vec<TruncatedMsg> = if d == 2 {
        vec![inputs[1].clone(), inputs[0].clone()]
    } else {
        let mut fwd = Vec::with_capacity(d - 1);
        fwd.push(inputs[0].clone());
        for msg in &inputs[1..d - 1] {
            let next = ecn_pair(fwd.last().unwrap(), msg, n_m, bubbles);
            fwd.push(next);
        }
        let mut bwd = vec![inputs[d - 1].clone()];
        for msg in inputs[1..d - 1].iter().rev() {
            let next = ecn_pair(bwd.last().unwrap(), msg, n_m, bubbles);
            bwd.push(next);
        }
        bwd.reverse();
        (0..d)
            .map(|e| {
                if e == 0 {
                    bwd[0].clone()
                } else if e == d - 1 {
                    fwd[d - 2].clone()
                } else {
                    ecn_pair(&fwd[e - 1], &bwd[e], n_m, bubbles)
                }
            })
            .collect()
    };
    outs.into_iter()
        .zip(hs)
        .map(|(o, &h)| permute_locs(&o, field.inv(h).expect("nonzero coefficient"), field))
        .collect()
}

/// Extended min-sum settings. The reference operating point is n_m = 20,
/// offset = 0.3, 4 bubbles, 10 iterations on GF(64).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmsConfig {
    pub n_m: usize,
    pub offset: f64,
    pub bubbles: usize,
    pub max_iter: usize,
}

impl Default for EmsConfig {
    fn default() -> Self {
        EmsConfig { n_m: 20, offset: 0.3, bubbles: 4, max_iter: 10 }
    }
}

/// Flooding extended min-sum decoder.
///
/// Hard decisions are checked against the syndrome before the first
/// iteration (a clean frame costs no message passing) and after every
/// iteration. The posterior is the channel message plus all incoming
/// check messages, fill-extended.
pub fn ems_decode(pcm: &NbPcm, llrs: &[DenseLlr], cfg: &EmsConfig) -> NbDecodeResult {
    assert_eq!(llrs.len(), pcm.n);
    let field = &pcm.field;
    let symbols: Vec<u8> = llrs.iter().map(|d| hard_symbol(d)).collect();
    if pcm.syndrome_ok(&symbols) {
        return NbDecodeResult { symbols, iterations_used: 0, syndrome_ok: true };
    }
    // (row, slot in that row) of every edge, grouped per column.
    let mut col_edges = vec![Vec::new(); pcm.n];
    for (r, row) in pcm.rows.iter().enumerate() {
        for (j, &(c, _)) in row.iter().enumerate() {
            col_edges[c].push((r, j));
        }
    }
    let mut c2v_msgs: Vec<Vec<Option<TruncatedMsg>>> =
        pcm.rows.iter().map(|row| vec![None; row.len()]).collect();
    let mut symbols = symbols;
    for it in 1..=cfg.max_iter {
        let v2c_msgs: Vec<Vec<TruncatedMsg>> = pcm
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &(c, h))| {
                        let others: Vec<&TruncatedMsg> = col_edges[c]
                            .iter()
                            .filter(|&&(rr, jj)| (rr, jj) != (r, j))
                            .filter_map(|&(rr, jj)| c2v_msgs[rr][jj].as_ref())
                            .collect();
                        v2c(&llrs[c], &others, h, cfg.n_m, cfg.offset, field)
                    })
                    .collect()
            })
            .collect();
        for (r, row) in pcm.rows.iter().enumerate() {
            let hs: Vec<u8> = row.iter().map(|&(_, h)| h).collect();
            for (j, out) in c2v(&v2c_msgs[r], &hs, cfg.n_m, cfg.bubbles, field)
                .into_iter()
                .enumerate()
            {
                c2v_msgs[r][j] = Some(out);
            }
        }
        for (c, sym) in symbols.iter_mut().enumerate() {
            let mut dense = llrs[c].clone();
            for &(rr, jj) in &col_edges[c] {
                let msg = c2v_msgs[rr][jj].as_ref().unwrap();
                for (a, d) in dense.iter_mut().enumerate() {
                    *d += msg.get(a as u8);
                }
            }
            *sym = hard_symbol(&dense);
        }
        if pcm.syndrome_ok(&symbols) {
            return NbDecodeResult { symbols, iterations_used: it, syndrome_ok: true };
        }
    }
    NbDecodeResult { symbols, iterations_used: cfg.max_iter, syndrome_ok: false }
}

fn dense_permute(msg: &[f64], h: u8, field: &FieldTables) -> Vec<f64> {
    assert_ne!(h, 0);
    let mut out = vec![0.0; msg.len()];
    for (a, &v) in msg.iter().enumerate() {
        out[field.mul(h, a as u8) as usize] = v;
    }
    out
}

fn dense_maxconv(a: &[f64], b: &[f64]) -> Vec<f64> {
    let q = a.len();
    (0..q)
        .map(|z| {
            (0..q)
                .map(|x| a[x] + b[x ^ z])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Untruncated max-domain decoder: the same schedule as [`ems_decode`] with
/// full q-length messages and exhaustive pairwise max-convolution at the
/// checks. O(q²) per elementary combine, reference use only.
pub fn dense_reference_decode(pcm: &NbPcm, llrs: &[DenseLlr], max_iter: usize) -> NbDecodeResult {
    assert_eq!(llrs.len(), pcm.n);
    let field = &pcm.field;
    let symbols: Vec<u8> = llrs.iter().map(|d| hard_symbol(d)).collect();
    if pcm.syndrome_ok(&symbols) {
        return NbDecodeResult { symbols, iterations_used: 0, syndrome_ok: true };
    }
    let mut col_edges = vec![Vec::new(); pcm.n];
    for (r, row) in pcm.rows.iter().enumerate() {
        for (j, &(c, _)) in row.iter().enumerate() {
            col_edges[c].push((r, j));
        }
    }
    let mut c2v_msgs: Vec<Vec<Option<Vec<f64>>>> =
        pcm.rows.iter().map(|row| vec![None; row.len()]).collect();
    let mut symbols = symbols;
    for it in 1..=max_iter {
        let v2c_msgs: Vec<Vec<Vec<f64>>> = pcm
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &(c, h))| {
                        let mut dense = llrs[c].clone();
                        for &(rr, jj) in &col_edges[c] {
                            if (rr, jj) == (r, j) {
                                continue;
                            }
                            if let Some(msg) = &c2v_msgs[rr][jj] {
                                for (d, &v) in dense.iter_mut().zip(msg) {
                                    *d += v;
                                }
                            }
                        }
                        dense_permute(&dense, h, field)
                    })
                    .collect()
            })
            .collect();
        for (r, row) in pcm.rows.iter().enumerate() {
            let inputs = &v2c_msgs[r];
            let d = inputs.len();
            let outs: Vec<Vec<f64>> = if d == 2 {
                vec![inputs[1].clone(), inputs[0].clone()]
            } else {
                let mut fwd = vec![inputs[0].clone()];
                for msg in &inputs[1..d - 1] {
                    let next = dense_maxconv(fwd.last().unwrap(), msg);
                    fwd.push(next);
                }
                let mut bwd = vec![inputs[d - 1].clone()];
                for msg in inputs[1..d - 1].iter().rev() {
                    let next = dense_maxconv(bwd.last().unwrap(), msg);
                    bwd.push(next);
                }
                bwd.reverse();
                (0..d)
                    .map(|e| {
                        if e == 0 {
                            bwd[0].clone()
                        } else if e == d - 1 {
                            fwd[d - 2].clone()
                        } else {
                            dense_maxconv(&fwd[e - 1], &bwd[e])
                        }
                    })
                    .collect()
            };
            for (j, (out, &(_, h))) in outs.into_iter().zip(row).enumerate() {
                c2v_msgs[r][j] =
                    Some(dense_permute(&out, field.inv(h).expect("nonzero"), field));
            }
        }
        for (c, sym) in symbols.iter_mut().enumerate() {
            let mut dense = llrs[c].clone();
            for &(rr, jj) in &col_edges[c] {
                for (d, &v) in dense.iter_mut().zip(c2v_msgs[rr][jj].as_ref().unwrap()) {
                    *d += v;
                }
            }
            *sym = hard_symbol(&dense);
        }
        if pcm.syndrome_ok(&symbols) {
            return NbDecodeResult { symbols, iterations_used: it, syndrome_ok: true };
        }
    }
    NbDecodeResult { symbols, iterations_used: max_iter, syndrome_ok: false }
}

enum EncPlan {
    /// Left M×M block inverted; codeword is [parity | message].
    LeftBlock { inv: Vec<Vec<u8>>, right: Vec<Vec<(usize, u8)>> },
    /// Fallback full elimination with column pivoting; message sits on the
    /// free columns, so the layout is systematic only up to permutation.
    FullGe { pivots: Vec<(usize, Vec<u8>)>, free_cols: Vec<usize> },
}

/// Encoder with the one-time elimination precomputed.
pub struct NbEncoder {
    n: usize,
    m: usize,
    field: FieldTables,
    plan: EncPlan,
}

/// Gauss-Jordan inverse over GF(q), None when singular.
fn gf_invert(a: &[Vec<u8>], field: &FieldTables) -> Option<Vec<Vec<u8>>> {
    let m = a.len();
    let mut work: Vec<Vec<u8>> = a.to_vec();
    let mut inv: Vec<Vec<u8>> = (0..m)
        .map(|i| (0..m).map(|j| u8::from(i == j)).collect())
        .collect();
    for col in 0..m {
        let pivot = (col..m).find(|&r| work[r][col] != 0)?;
        work.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = field.inv(work[col][col]).unwrap();
        for j in 0..m {
            work[col][j] = field.mul(scale, work[col][j]);
            inv[col][j] = field.mul(scale, inv[col][j]);
        }
        for r in 0..m {
            if r == col || work[r][col] == 0 {
                continue;
            }
            let f = work[r][col];
            for j in 0..m {
                work[r][j] = gf_add(work[r][j], field.mul(f, work[col][j]));
                inv[r][j] = gf_add(inv[r][j], field.mul(f, inv[col][j]));
            }
        }
    }
    Some(inv)
}

impl NbEncoder {
    pub fn new(pcm: &NbPcm) -> Self {
        let (m, n) = (pcm.m, pcm.n);
        let mut left = vec![vec![0u8; m]; m];
        let mut right: Vec<Vec<(usize, u8)>> = vec![Vec::new(); m];
        for (r, row) in pcm.rows.iter().enumerate() {
            for &(c, h) in row {
                if c < m {
                    left[r][c] = h;
                } else {
                    right[r].push((c - m, h));
                }
            }
        }
        let plan = match gf_invert(&left, &pcm.field) {
            Some(inv) => EncPlan::LeftBlock { inv, right },
            None => {
                // Reduced row echelon with natural column pivoting, pivot
                // rows normalized to coefficient 1.
                let mut rows: Vec<Vec<u8>> = pcm
                    .rows
                    .iter()
                    .map(|row| {
                        let mut dense = vec![0u8; n];
                        for &(c, h) in row {
                            dense[c] = h;
                        }
                        dense
                    })
                    .collect();
                let mut pivot_cols = Vec::new();
                let mut r = 0;
                for col in 0..n {
                    let Some(pr) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
                        continue;
                    };
                    rows.swap(r, pr);
                    let scale = pcm.field.inv(rows[r][col]).unwrap();
                    for x in rows[r].iter_mut() {
                        *x = pcm.field.mul(scale, *x);
                    }
                    let pivot_row = rows[r].clone();
                    for (i, row) in rows.iter_mut().enumerate() {
                        if i != r && row[col] != 0 {
                            let f = row[col];
                            for (a, &b) in row.iter_mut().zip(&pivot_row) {
                                *a = gf_add(*a, pcm.field.mul(f, b));
                            }
                        }
                    }
                    pivot_cols.push(col);
                    r += 1;
                    if r == rows.len() {
                        break;
                    }
                }
                let mut is_pivot = vec![false; n];
                for &c in &pivot_cols {
                    is_pivot[c] = true;
                }
                let free_cols = (0..n).filter(|&c| !is_pivot[c]).collect();
                let pivots = pivot_cols.into_iter().zip(rows).collect();
                EncPlan::FullGe { pivots, free_cols }
            }
        };
        NbEncoder { n, m, field: pcm.field.clone(), plan }
    }

    /// Message symbols per codeword: N − M with an invertible left block,
    /// N − rank under the fallback.
    pub fn msg_len(&self) -> usize {
        match &self.plan {
            EncPlan::LeftBlock { .. } => self.n - self.m,
            EncPlan::FullGe { free_cols, .. } => free_cols.len(),
        }
    }

    pub fn encode(&self, msg: &[u8]) -> Vec<u8> {
        assert_eq!(msg.len(), self.msg_len());
        match &self.plan {
            EncPlan::LeftBlock { inv, right } => {
                // H_p p = H_k k, then codeword [p | k].
                let t: Vec<u8> = right
                    .iter()
                    .map(|row| {
                        row.iter().fold(0u8, |s, &(c, h)| gf_add(s, self.field.mul(h, msg[c])))
                    })
                    .collect();
                let mut cw = Vec::with_capacity(self.n);
                for inv_row in inv {
                    cw.push(
                        inv_row
                            .iter()
                            .zip(&t)
                            .fold(0u8, |s, (&a, &b)| gf_add(s, self.field.mul(a, b))),
                    );
                }
                cw.extend_from_slice(msg);
                cw
            }
            EncPlan::FullGe { pivots, free_cols } => {
                let mut cw = vec![0u8; self.n];
                for (&c, &b) in free_cols.iter().zip(msg) {
                    cw[c] = b;
                }
                for (col, row) in pivots {
                    cw[*col] = free_cols
                        .iter()
                        .fold(0u8, |s, &f| gf_add(s, self.field.mul(row[f], cw[f])));
                }
                cw
            }
        }
    }
}

/// One-shot encode; reuse [`NbEncoder`] in loops.
pub fn nb_encode(pcm: &NbPcm, msg: &[u8]) -> Vec<u8> {
    NbEncoder::new(pcm).encode(msg)
}

/// Parse the nonbinary alist dialect: header `N M q`, dv_max dc_max, column
/// degrees, row degrees, then one line per column of (row, value) pairs,
/// 1-indexed rows, values in 1..q−1, zero pairs as padding.
pub fn parse_nb_alist(text: &str, field: &FieldTables) -> Result<NbPcm, AlistError> {
    let mut sc = Scanner::new(text);
    let (ln, hdr) = sc.ints()?;
    if hdr.len() != 3 {
        return fail(ln, format!("header needs 3 values (N M q), got {}", hdr.len()));
    }
    let (n, m, q) = (hdr[0], hdr[1], hdr[2]);
    if n == 0 || m == 0 {
        return fail(ln, "zero dimension");
    }
    if q != field.q() {
        return fail(ln, format!("field size {} does not match GF({})", q, field.q()));
    }
    let (ln, dmax) = sc.ints()?;
    if dmax.len() != 2 {
        return fail(ln, "expected dv_max dc_max");
    }
    let (dv_max, dc_max) = (dmax[0], dmax[1]);
    let (ln, dv) = sc.ints()?;
    if dv.len() != n {
        return fail(ln, format!("{} column degrees, expected {}", dv.len(), n));
    }
    if let Some(&bad) = dv.iter().find(|&&d| d > dv_max) {
        return fail(ln, format!("column degree {} exceeds dv_max {}", bad, dv_max));
    }
    let (ln, dc) = sc.ints()?;
    if dc.len() != m {
        return fail(ln, format!("{} row degrees, expected {}", dc.len(), m));
    }

    let mut rows: Vec<Vec<(usize, u8)>> = vec![Vec::new(); m];
    for (c, &deg) in dv.iter().enumerate() {
        let (ln, toks) = sc.ints()?;
        if toks.len() < 2 * deg {
            return fail(ln, format!("{} values, need {} (row, value) pairs", toks.len(), deg));
        }
        let mut seen_rows = Vec::with_capacity(deg);
        for pair in toks[..2 * deg].chunks(2) {
            let (r, v) = (pair[0], pair[1]);
            if r == 0 || r > m {
                return fail(ln, format!("row index {} out of 1..={}", r, m));
            }
            if v == 0 {
                return fail(ln, "zero coefficient in entry list");
            }
            if v >= q {
                return fail(ln, format!("coefficient {} outside 1..{}", v, q));
            }
            let r = r - 1;
            if seen_rows.contains(&r) {
                return fail(ln, format!("repeated row index {}", r + 1));
            }
            seen_rows.push(r);
            rows[r].push((c, v as u8));
        }
        if toks[2 * deg..].iter().any(|&t| t != 0) {
            return fail(ln, "nonzero entry beyond declared degree");
        }
    }
    for (r, &deg) in dc.iter().enumerate() {
        if rows[r].len() != deg {
            return fail(
                sc.line_no,
                format!("row {} has degree {}, header says {}", r + 1, rows[r].len(), deg),
            );
        }
        if rows[r].len() > dc_max {
            return fail(sc.line_no, format!("row {} exceeds dc_max {}", r + 1, dc_max));
        }
    }
    Ok(NbPcm::from_rows(m, n, field.clone(), rows))
}

/// Emit the nonbinary alist dialect, zero-pair padded.
pub fn write_nb_alist(pcm: &NbPcm) -> String {
    let dv_max = pcm.dv_max();
    let mut s = format!("{} {} {}\n{} {}\n", pcm.n, pcm.m, pcm.field.q(), dv_max, pcm.dc_max());
    s.push_str(
        &pcm.cols.iter().map(|c| c.len().to_string()).collect::<Vec<_>>().join(" "),
    );
    s.push('\n');
    s.push_str(
        &pcm.rows.iter().map(|r| r.len().to_string()).collect::<Vec<_>>().join(" "),
    );
    s.push('\n');
    for col in &pcm.cols {
        let mut toks: Vec<String> = col
            .iter()
            .flat_map(|&(r, v)| [(r + 1).to_string(), v.to_string()])
            .collect();
        toks.resize(2 * dv_max, "0".to_string());
        s.push_str(&toks.join(" "));
        s.push('\n');
    }
    s
}

/// Random ultra-sparse PCM: every column has exactly two distinct rows, no
/// two columns share a row pair (rules out length-4 cycles), row degrees
/// greedily balanced. The first M columns form a cyclic two-diagonal block
/// that is re-rolled until invertible, so encoding always has the
/// [parity | message] layout and H has full row rank.
pub fn generate_nb_pcm(n: usize, m: usize, field: &FieldTables, seed: u64) -> NbPcm {
    assert!(m >= 3 && n > m, "need 3 <= M < N");
    let q = field.q();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nonzero = |rng: &mut ChaCha8Rng| rng.gen_range(1..q) as u8;
    loop {
        let mut rows: Vec<Vec<(usize, u8)>> = vec![Vec::new(); m];
        let mut used_pairs = std::collections::HashSet::new();
        for c in 0..m {
            let (r1, r2) = (c, (c + 1) % m);
            used_pairs.insert((r1.min(r2), r1.max(r2)));
            rows[r1].push((c, nonzero(&mut rng)));
            rows[r2].push((c, nonzero(&mut rng)));
        }
        let mut degree: Vec<usize> = vec![2; m];
        for c in m..n {
            // Row candidates from lightest up, randomized within equal
            // degree, first unused pair wins.
            let mut order: Vec<usize> = (0..m).collect();
            let keys: Vec<u64> = (0..m).map(|_| rng.gen()).collect();
            order.sort_by_key(|&r| (degree[r], keys[r]));
            let mut chosen = None;
            'search: for a in 0..m {
                for b in a + 1..m {
                    let (r1, r2) = (order[a], order[b]);
                    let pair = (r1.min(r2), r1.max(r2));
                    if !used_pairs.contains(&pair) {
                        used_pairs.insert(pair);
                        chosen = Some((r1, r2));
                        break 'search;
                    }
                }
            }
            let (r1, r2) = chosen.expect("fewer columns than distinct row pairs");
            degree[r1] += 1;
            degree[r2] += 1;
            rows[r1].push((c, nonzero(&mut rng)));
            rows[r2].push((c, nonzero(&mut rng)));
        }
        let mut left = vec![vec![0u8; m]; m];
        for (r, row) in rows.iter().enumerate() {
            for &(c, h) in row {
                if c < m {
                    left[r][c] = h;
                }
            }
        }
        if gf_invert(&left, field).is_some() {
            return NbPcm::from_rows(m, n, field.clone(), rows);
        }
    }
}
