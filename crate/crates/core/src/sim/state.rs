use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest qubit count a dense state may use (16 GiB of amplitudes).
pub const MAX_QUBITS: u32 = 30;

/// Dense amplitudes over `2^n` basis states, indexed by the assignment integer.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: u32,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn check_qubits(n: u32) -> Result<()> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::capacity(format!(
                "state vectors need 1 <= n <= {MAX_QUBITS}, got {n}"
            )));
        }
        Ok(())
    }

    /// Equal superposition, every amplitude `2^(-n/2)`.
    pub fn uniform(n: u32) -> Result<Self> {
        Self::check_qubits(n)?;
        let a = (-(n as f64) / 2.0).exp2();
        Ok(StateVector {
            n,
            amps: vec![Complex64::new(a, 0.0); 1 << n],
        })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::usage(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        Ok(StateVector {
            n: len.trailing_zeros(),
            amps,
        })
    }

    pub fn basis(n: u32, index: usize) -> Result<Self> {
        Self::check_qubits(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        *amps
            .get_mut(index)
            .ok_or_else(|| Error::usage(format!("basis index {index} out of range")))? =
            Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// Raw dump: little-endian `(re, im)` f64 pairs in index order.
    pub fn write_le<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = Vec::with_capacity(16 * 4096);
        for chunk in self.amps.chunks(4096) {
            buf.clear();
            for a in chunk {
                buf.extend_from_slice(&a.re.to_le_bytes());
                buf.extend_from_slice(&a.im.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_le<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() % 16 != 0 {
            return Err(Error::Parse(format!(
                "state dump length {} is not a multiple of 16",
                bytes.len()
            )));
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Self::from_amplitudes(amps)
    }
}
