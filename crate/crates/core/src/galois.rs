//! GF(2^m) arithmetic over log/antilog tables, for m up to 8.
//!
//! Elements are stored in polynomial basis as `u8` bit patterns (bit i =
//! coefficient of x^i). Multiplication and inversion go through discrete-log
//! tables built once per field from a primitive polynomial; addition is XOR.

use std::fmt;

/// Default primitive polynomial per degree, `DEFAULT_PRIMITIVE_POLY[m - 1]`.
///
/// The degree-6 entry is x^6 + x + 1, the conventional choice for GF(64).
pub const DEFAULT_PRIMITIVE_POLY: [u32; 8] = [
    0b11,        // x + 1
    0b111,       // x^2 + x + 1
    0b1011,      // x^3 + x + 1
    0b10011,     // x^4 + x + 1
    0b100101,    // x^5 + x^2 + 1
    0b1000011,   // x^6 + x + 1
    0b10001001,  // x^7 + x^3 + 1
    0b100011101, // x^8 + x^4 + x^3 + x^2 + 1
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GfError {
    /// m outside 1..=8.
    UnsupportedDegree(u32),
    /// Polynomial is not monic of degree m (bit m unset or higher bits set).
    InvalidPoly(u32),
    /// x does not generate the full multiplicative group modulo this polynomial.
    NotPrimitive(u32),
}

impl fmt::Display for GfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GfError::UnsupportedDegree(m) => write!(f, "field degree {} not in 1..=8", m),
            GfError::InvalidPoly(p) => write!(f, "{:#b} is not a monic polynomial of the requested degree", p),
            GfError::NotPrimitive(p) => {
                write!(f, "{:#b} is not primitive: x does not cycle through all nonzero elements", p)
            }
        }
    }
}

impl std::error::Error for GfError {}

/// Log/antilog tables for one GF(2^m).
///
/// `antilog[i]` is alpha^i where alpha is the class of x; `log` is its inverse
/// on nonzero elements. Construction verifies primitivity by walking the full
/// generator cycle, so every table in circulation satisfies
/// `antilog[log[x]] == x` and has exactly q - 1 distinct nonzero entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldTables {
    m: u32,
    q: usize,
    primitive_poly: u32,
    /// log[x - 1] = discrete log of nonzero element x.
    log: Vec<u16>,
    /// antilog[i] = alpha^i, i in 0..q-1.
    antilog: Vec<u8>,
}

/// Multiply by x and reduce modulo `poly` (degree m, bit m set).
fn mulx(x: u32, m: u32, poly: u32) -> u32 {
    let shifted = x << 1;
    if shifted & (1 << m) != 0 {
        shifted ^ poly
    } else {
        shifted
    }
}

/// Build the tables for GF(2^m) from a primitive polynomial.
///
/// Fails if m is outside 1..=8, if `poly` is not monic of degree m, or if x
/// fails to generate the whole multiplicative group (non-primitive `poly`).
pub fn build_field(m: u32, poly: u32) -> Result<FieldTables, GfError> {
    if !(1..=8).contains(&m) {
        return Err(GfError::UnsupportedDegree(m));
    }
    let q = 1usize << m;
    if poly & (1 << m) == 0 || poly >> (m + 1) != 0 {
        return Err(GfError::InvalidPoly(poly));
    }

    let mut antilog = Vec::with_capacity(q - 1);
    let mut log = vec![0u16; q - 1];
    let mut seen = vec![false; q];
    let mut x = 1u32;
    for i in 0..q - 1 {
        if seen[x as usize] {
            // Early repeat: the generator cycle is shorter than q - 1.
            return Err(GfError::NotPrimitive(poly));
        }
        seen[x as usize] = true;
        antilog.push(x as u8);
        log[x as usize - 1] = i as u16;
        x = mulx(x, m, poly);
    }
    if x != 1 {
        return Err(GfError::NotPrimitive(poly));
    }

    Ok(FieldTables { m, q, primitive_poly: poly, log, antilog })
}

/// Build GF(2^m) with the default primitive polynomial for that degree.
pub fn default_field(m: u32) -> Result<FieldTables, GfError> {
    if !(1..=8).contains(&m) {
        return Err(GfError::UnsupportedDegree(m));
    }
    build_field(m, DEFAULT_PRIMITIVE_POLY[m as usize - 1])
}

/// Field addition: XOR of coefficient vectors. Independent of the modulus.
#[inline]
pub fn gf_add(a: u8, b: u8) -> u8 {
    a ^ b
}

impl FieldTables {
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Field size q = 2^m.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn primitive_poly(&self) -> u32 {
        self.primitive_poly
    }

    /// alpha^i for i in 0..q-1.
    pub fn antilog(&self, i: usize) -> u8 {
        self.antilog[i]
    }

    /// Discrete log of a nonzero element; None for 0.
    pub fn log(&self, a: u8) -> Option<u16> {
        if a == 0 || a as usize >= self.q {
            None
        } else {
            Some(self.log[a as usize - 1])
        }
    }

    /// Element enumeration: alpha_0 = 0, alpha_i = antilog[i - 1] for i >= 1.
    pub fn alpha(&self, i: usize) -> u8 {
        if i == 0 {
            0
        } else {
            self.antilog[i - 1]
        }
    }

    /// Multiplication via the log tables: 0 absorbs, otherwise
    /// antilog[(log a + log b) mod (q - 1)].
    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            return 0;
        }
        let la = self.log[a as usize - 1] as usize;
        let lb = self.log[b as usize - 1] as usize;
        self.antilog[(la + lb) % (self.q - 1)]
    }

    /// Multiplicative inverse; None for 0.
    #[inline]
    pub fn inv(&self, a: u8) -> Option<u8> {
        if a == 0 {
            return None;
        }
        let la = self.log[a as usize - 1] as usize;
        Some(self.antilog[(self.q - 1 - la) % (self.q - 1)])
    }

    /// a / b; None when b = 0.
    #[inline]
    pub fn div(&self, a: u8, b: u8) -> Option<u8> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    /// a^e by log arithmetic; 0^0 = 1.
    pub fn pow(&self, a: u8, e: u32) -> u8 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let la = self.log[a as usize - 1] as u64;
        self.antilog[((la * e as u64) % (self.q as u64 - 1)) as usize]
    }
}
