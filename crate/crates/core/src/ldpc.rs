//! Binary LDPC baseline: alist ingestion, encoding, flooding min-sum.
//!
//! The decoder is plain min-sum, two passes per check node, flooding
//! schedule, hard-decision syndrome test before the first iteration and after
//! every subsequent one. A normalization factor is available but defaults to
//! 1.0 (off): the complexity accounting assumes the raw min-sum structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Binary parity-check matrix in adjacency form.
///
/// `cols[v]` lists the check rows of variable v; `rows[c]` lists the
/// variables of check c. The two views are kept consistent and edges are
/// never repeated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinPcm {
    pub m: usize,
    pub n: usize,
    pub cols: Vec<Vec<usize>>,
    pub rows: Vec<Vec<usize>>,
    pub dv_max: usize,
    pub dc_max: usize,
}

impl BinPcm {
    /// Build from row adjacency, deriving the column view.
    pub fn from_rows(m: usize, n: usize, rows: Vec<Vec<usize>>) -> Result<Self, AlistError> {
        assert_eq!(rows.len(), m);
        let mut cols = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &v in row {
                assert!(v < n, "column {} out of range", v);
                cols[v].push(r);
            }
        }
        let dv_max = cols.iter().map(Vec::len).max().unwrap_or(0);
        let dc_max = rows.iter().map(Vec::len).max().unwrap_or(0);
        Ok(BinPcm { m, n, cols, rows, dv_max, dc_max })
    }

    /// H c over GF(2) is zero.
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        assert_eq!(bits.len(), self.n);
        self.rows.iter().all(|row| row.iter().fold(0u8, |s, &v| s ^ (bits[v] & 1)) == 0)
    }

    /// Edge count.
    pub fn num_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

#[derive(Debug)]
pub struct AlistError {
    pub line: usize,
    pub msg: String,
}

impl std::fmt::Display for AlistError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "alist line {}: {}", self.line, self.msg)
    }
}

impl std::error::Error for AlistError {}

pub(crate) fn fail<T>(line: usize, msg: impl Into<String>) -> Result<T, AlistError> {
    Err(AlistError { line, msg: msg.into() })
}

/// Line-oriented integer scanner that remembers where it is, so malformed
/// files are reported by line number.
pub(crate) struct Scanner<'a> {
    lines: std::str::Lines<'a>,
    pub(crate) line_no: usize,
}

impl<'a> Scanner<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Scanner { lines: text.lines(), line_no: 0 }
    }

    /// Next non-blank line as a vector of integers.
    pub(crate) fn ints(&mut self) -> Result<(usize, Vec<usize>), AlistError> {
        for line in self.lines.by_ref() {
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut out = Vec::new();
            for tok in line.split_whitespace() {
                match tok.parse::<usize>() {
                    Ok(v) => out.push(v),
                    Err(_) => return fail(self.line_no, format!("bad integer {:?}", tok)),
                }
            }
            return Ok((self.line_no, out));
        }
        fail(self.line_no + 1, "unexpected end of file")
    }
}

/// Read one adjacency line: the first `deg` entries are 1-indexed neighbors,
/// anything after that must be the 0 padding of the classical format.
fn adjacency_line(
    sc: &mut Scanner,
    deg: usize,
    limit: usize,
    what: &str,
) -> Result<Vec<usize>, AlistError> {
    let (ln, vals) = sc.ints()?;
    if vals.len() < deg {
        return fail(ln, format!("{} entries, need {}", vals.len(), deg));
    }
    let mut out = Vec::with_capacity(deg);
    for &v in &vals[..deg] {
        if v == 0 || v > limit {
            return fail(ln, format!("{} index {} out of 1..={}", what, v, limit));
        }
        let v = v - 1;
        if out.contains(&v) {
            return fail(ln, format!("repeated {} index {}", what, v + 1));
        }
        out.push(v);
    }
    if vals[deg..].iter().any(|&v| v != 0) {
        return fail(ln, "nonzero entry beyond declared degree");
    }
    Ok(out)
}

/// Parse the classical alist format:
/// N M / dv_max dc_max / column degrees / row degrees / N column adjacency
/// lines / M row adjacency lines, 1-indexed, zero-padded.
pub fn parse_alist(text: &str) -> Result<BinPcm, AlistError> {
    let mut sc = Scanner::new(text);
    let (ln, hdr) = sc.ints()?;
    if hdr.len() != 2 {
        return fail(ln, format!("header needs 2 values (N M), got {}", hdr.len()));
    }
    let (n, m) = (hdr[0], hdr[1]);
    if n == 0 || m == 0 {
        return fail(ln, "zero dimension");
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
    if let Some(&bad) = dc.iter().find(|&&d| d > dc_max) {
        return fail(ln, format!("row degree {} exceeds dc_max {}", bad, dc_max));
    }

    let mut cols = Vec::with_capacity(n);
    for &deg in &dv {
        cols.push(adjacency_line(&mut sc, deg, m, "row")?);
    }
    let mut rows = Vec::with_capacity(m);
    for &deg in &dc {
        rows.push(adjacency_line(&mut sc, deg, n, "column")?);
    }

    // Cross-check the two views.
    let mut seen = vec![Vec::new(); n];
    for (r, row) in rows.iter().enumerate() {
        for &v in row {
            seen[v].push(r);
        }
    }
    for v in 0..n {
        let mut want = cols[v].clone();
        want.sort_unstable();
        let mut got = seen[v].clone();
        got.sort_unstable();
        if want != got {
            return fail(
                sc.line_no,
                format!("column {} adjacency disagrees with the row lists", v + 1),
            );
        }
    }
    Ok(BinPcm { m, n, cols, rows, dv_max, dc_max })
}

/// Emit the classical zero-padded alist form.
pub fn write_alist(pcm: &BinPcm) -> String {
    let mut s = String::new();
    s.push_str(&format!("{} {}\n{} {}\n", pcm.n, pcm.m, pcm.dv_max, pcm.dc_max));
    let degs = |lists: &[Vec<usize>]| {
        lists.iter().map(|l| l.len().to_string()).collect::<Vec<_>>().join(" ")
    };
    s.push_str(&degs(&pcm.cols));
    s.push('\n');
    s.push_str(&degs(&pcm.rows));
    s.push('\n');
    let mut pad_line = |list: &[usize], width: usize| {
        let mut toks: Vec<String> = list.iter().map(|&i| (i + 1).to_string()).collect();
        toks.resize(width, "0".to_string());
        s.push_str(&toks.join(" "));
        s.push('\n');
    };
    for col in &pcm.cols {
        pad_line(col, pcm.dv_max);
    }
    for row in &pcm.rows {
        pad_line(row, pcm.dc_max);
    }
    s
}

/// One-time Gaussian elimination encoder.
///
/// H is reduced to reduced row echelon form with column pivoting; message
/// bits go to the free columns, pivot bits are solved from them. For a
/// rank-deficient H the message simply shrinks: msg_len() = N - rank.
pub struct BinEncoder {
    n: usize,
    /// (pivot column, RREF row bitset) per pivot; the row touches its pivot
    /// column and free columns only.
    pivots: Vec<(usize, Vec<u64>)>,
    free_cols: Vec<usize>,
}

fn bit(words: &[u64], i: usize) -> bool {
    words[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(words: &mut [u64], i: usize) {
    words[i / 64] |= 1 << (i % 64);
}

impl BinEncoder {
    pub fn new(pcm: &BinPcm) -> Self {
        let n = pcm.n;
        let w = n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = pcm
            .rows
            .iter()
            .map(|row| {
                let mut bits = vec![0u64; w];
                for &v in row {
                    set_bit(&mut bits, v);
                }
                bits
            })
            .collect();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for col in 0..n {
            let Some(pr) = (r..rows.len()).find(|&i| bit(&rows[i], col)) else {
                continue;
            };
            rows.swap(r, pr);
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && bit(row, col) {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a ^= b;
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
        BinEncoder { n, pivots, free_cols }
    }

    /// Rank of H.
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Bits a message carries: N - rank.
    pub fn msg_len(&self) -> usize {
        self.free_cols.len()
    }

    /// Codeword positions that carry the message verbatim.
    pub fn free_cols(&self) -> &[usize] {
        &self.free_cols
    }

    /// Systematic-up-to-permutation encoding: msg lands on the free columns.
    pub fn encode(&self, msg: &[u8]) -> Vec<u8> {
        assert_eq!(msg.len(), self.msg_len(), "message length must be N - rank");
        let w = self.n.div_ceil(64);
        let mut cw = vec![0u64; w];
        for (&col, &b) in self.free_cols.iter().zip(msg) {
            if b & 1 == 1 {
                set_bit(&mut cw, col);
            }
        }
        for (col, row) in &self.pivots {
            let parity =
                row.iter().zip(&cw).fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones()) & 1;
            if parity == 1 {
                set_bit(&mut cw, *col);
            }
        }
        (0..self.n).map(|i| bit(&cw, i) as u8).collect()
    }
}

/// One-shot encode (builds the elimination each call; reuse [`BinEncoder`]
/// in loops).
pub fn encode_bin(pcm: &BinPcm, msg: &[u8]) -> Vec<u8> {
    BinEncoder::new(pcm).encode(msg)
}

/// Outcome of a decoding attempt. `iterations_used` = 0 means the input hard
/// decisions already satisfied every check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub hard_bits: Vec<u8>,
    pub iterations_used: usize,
    pub syndrome_ok: bool,
}

/// Plain flooding min-sum (normalization 1.0 = off).
pub fn min_sum_decode(pcm: &BinPcm, llrs: &[f64], max_iter: usize) -> DecodeResult {
    min_sum_decode_with(pcm, llrs, max_iter, 1.0)
}

/// Flooding min-sum with a check-output normalization factor.
///
/// Positive LLR means bit 0. Two-pass check update: sign product and two
/// smallest magnitudes, each output excluding its own input.
pub fn min_sum_decode_with(
    pcm: &BinPcm,
    llrs: &[f64],
    max_iter: usize,
    scale: f64,
) -> DecodeResult {
    assert_eq!(llrs.len(), pcm.n, "LLR count must equal the code length");
    let hard = |totals: &[f64]| -> Vec<u8> {
        totals.iter().map(|&l| if l < 0.0 { 1u8 } else { 0u8 }).collect()
    };
    let mut bits = hard(llrs);
    if pcm.syndrome_ok(&bits) {
        return DecodeResult { hard_bits: bits, iterations_used: 0, syndrome_ok: true };
    }
    // c2v[c][j]: message from check c to its j-th neighbor.
    let mut c2v: Vec<Vec<f64>> = pcm.rows.iter().map(|r| vec![0.0; r.len()]).collect();
    let mut totals: Vec<f64> = llrs.to_vec();
    for it in 1..=max_iter {
        for (c, row) in pcm.rows.iter().enumerate() {
            let msgs = &mut c2v[c];
            let mut sign = 1.0f64;
            let mut min1 = f64::INFINITY;
            let mut min2 = f64::INFINITY;
            let mut min1_at = 0;
            for (j, &v) in row.iter().enumerate() {
                let x = totals[v] - msgs[j];
                if x < 0.0 {
                    sign = -sign;
                }
                let a = x.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    min1_at = j;
                } else if a < min2 {
                    min2 = a;
                }
            }
            // Second pass writes the extrinsic outputs; totals are updated
            // incrementally so the variable side needs no separate sweep.
            for (j, &v) in row.iter().enumerate() {
                let x = totals[v] - msgs[j];
                let self_sign = if x < 0.0 { -1.0 } else { 1.0 };
                let mag = if j == min1_at { min2 } else { min1 };
                let out = scale * sign * self_sign * mag;
                totals[v] += out - msgs[j];
                msgs[j] = out;
            }
        }
        bits = hard(&totals);
        if pcm.syndrome_ok(&bits) {
            return DecodeResult { hard_bits: bits, iterations_used: it, syndrome_ok: true };
        }
    }
    DecodeResult { hard_bits: bits, iterations_used: max_iter, syndrome_ok: false }
}

/// Progressive edge-growth style generator, d_v = 3 by default.
///
/// Columns are wired one edge at a time to the check farthest from the
/// variable in the current graph (min-degree among the farthest, seeded
/// random tie-break), which pushes short cycles out. If the result is rank
/// deficient, extra edges are added to dependent rows until H has full row
/// rank, so the code rate is exactly 1 - M/N.
pub fn generate_bin_pcm(n: usize, m: usize, dv: usize, seed: u64) -> BinPcm {
    assert!(m > 0 && n > m, "need 0 < M < N");
    assert!(dv >= 1 && dv <= m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];

    // BFS distance from variable v to every check in the current graph.
    let dist_from = |v: usize, rows: &[Vec<usize>], cols: &[Vec<usize>]| -> Vec<usize> {
        let mut dist = vec![usize::MAX; m];
        let mut vis_v = vec![false; n];
        vis_v[v] = true;
        let mut frontier = vec![v];
        let mut d = 0;
        while !frontier.is_empty() {
            let mut next_checks = Vec::new();
            for &vv in &frontier {
                for &c in &cols[vv] {
                    if dist[c] == usize::MAX {
                        dist[c] = d;
                        next_checks.push(c);
                    }
                }
            }
            let mut next_vars = Vec::new();
            for &c in &next_checks {
                for &vv in &rows[c] {
                    if !vis_v[vv] {
                        vis_v[vv] = true;
                        next_vars.push(vv);
                    }
                }
            }
            frontier = next_vars;
            d += 1;
        }
        dist
    };

    for v in 0..n {
        for _ in 0..dv {
            let dist = dist_from(v, &rows, &cols);
            // Unreachable checks are infinitely far; among candidates at the
            // greatest distance prefer the lightest.
            let best = (0..m)
                .filter(|&c| !cols[v].contains(&c))
                .max_by_key(|&c| (dist[c], std::cmp::Reverse(rows[c].len())))
                .expect("dv <= m leaves a candidate");
            let ties: Vec<usize> = (0..m)
                .filter(|&c| {
                    !cols[v].contains(&c)
                        && dist[c] == dist[best]
                        && rows[c].len() == rows[best].len()
                })
                .collect();
            let pick = ties[rng.gen_range(0..ties.len())];
            rows[pick].push(v);
            cols[v].push(pick);
        }
    }

    // Full-rank repair: re-run elimination and give each dependent row an
    // extra edge until independence. Touches a handful of rows at most.
    loop {
        let pcm = BinPcm::from_rows(m, n, rows.clone()).unwrap();
        let enc = BinEncoder::new(&pcm);
        if enc.rank() == m {
            let mut rows = rows;
            for row in &mut rows {
                row.sort_unstable();
            }
            return BinPcm::from_rows(m, n, rows).unwrap();
        }
        // Find a dependent row: eliminate row-by-row and keep the first row
        // that reduces to zero.
        let w = n.div_ceil(64);
        let mut basis: Vec<Vec<u64>> = Vec::new();
        let mut dependent = None;
        'rows: for (r, row) in rows.iter().enumerate() {
            let mut bits = vec![0u64; w];
            for &v in row {
                set_bit(&mut bits, v);
            }
            for b in &basis {
                let lead = b.iter().rposition(|&x| x != 0).unwrap();
                let lead_bit = 63 - b[lead].leading_zeros() as usize + lead * 64;
                if bit(&bits, lead_bit) {
                    for (a, x) in bits.iter_mut().zip(b) {
                        *a ^= x;
                    }
                }
            }
            if bits.iter().all(|&x| x == 0) {
                dependent = Some(r);
                break 'rows;
            }
            basis.push(bits);
        }
        let r = dependent.expect("rank deficit implies a dependent row");
        let v = loop {
            let cand = rng.gen_range(0..n);
            if !rows[r].contains(&cand) {
                break cand;
            }
        };
        rows[r].push(v);
        cols[v].push(r);
    }
}
