//! Binary grid snapshots: `MACG`, u32 version, u32 nx, u32 ny, f64 dx, then
//! the x-face velocities, y-face velocities and cell pressures, all
//! little-endian.

use std::io::{Read, Write};

use super::{FaceField, GridLayout, MacGrid, Staggering};
use crate::error::{Result, SimError};

pub const MAGIC: &[u8; 4] = b"MACG";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct GridDump {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pressure: Vec<f64>,
}

impl GridDump {
    pub fn from_grid(grid: &MacGrid) -> Self {
        GridDump {
            nx: grid.layout.nx,
            ny: grid.layout.ny,
            dx: grid.layout.dx,
            u: grid.velocity.u.clone(),
            v: grid.velocity.v.clone(),
            pressure: grid.pressure.clone(),
        }
    }

    pub fn velocity(&self) -> FaceField {
        FaceField {
            u: self.u.clone(),
            v: self.v.clone(),
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.nx as u32).to_le_bytes())?;
        w.write_all(&(self.ny as u32).to_le_bytes())?;
        w.write_all(&self.dx.to_le_bytes())?;
        for x in self.u.iter().chain(&self.v).chain(&self.pressure) {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let err = |e: std::io::Error| SimError::DumpFormat(e.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(err)?;
        if &magic != MAGIC {
            return Err(SimError::DumpFormat("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4).map_err(err)?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(SimError::DumpFormat(format!("unsupported version {version}")));
        }
        r.read_exact(&mut b4).map_err(err)?;
        let nx = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4).map_err(err)?;
        let ny = u32::from_le_bytes(b4) as usize;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8).map_err(err)?;
        let dx = f64::from_le_bytes(b8);
        let mut read_vec = |n: usize| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                r.read_exact(&mut b8).map_err(err)?;
                out.push(f64::from_le_bytes(b8));
            }
            Ok(out)
        };
        let u = read_vec((nx + 1) * ny)?;
        let v = read_vec(nx * (ny + 1))?;
        let pressure = read_vec(nx * ny)?;
        Ok(GridDump {
            nx,
            ny,
            dx,
            u,
            v,
            pressure,
        })
    }

    pub fn matches_layout(&self, layout: &GridLayout) -> bool {
        self.nx == layout.nx
            && self.ny == layout.ny
            && self.u.len() == layout.len(Staggering::XFaces)
            && self.v.len() == layout.len(Staggering::YFaces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundaries;

    #[test]
    fn dump_round_trips_bit_exactly() {
        let layout = GridLayout::new(5, 3, 0.2, Boundaries::walls());
        let mut grid = MacGrid::new(layout, 1.0);
        for (k, x) in grid.velocity.u.iter_mut().enumerate() {
            *x = (k as f64).sin() / 3.0;
        }
        grid.pressure[4] = -1.0e-300;
        let dump = GridDump::from_grid(&grid);
        let mut bytes = Vec::new();
        dump.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 4 + 4 + 8 + 8 + 8 * (18 + 20 + 15));
        let back = GridDump::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, dump);
        assert!(back.matches_layout(&layout));
    }

    #[test]
    fn truncated_dump_is_rejected() {
        let layout = GridLayout::new(2, 2, 0.5, Boundaries::walls());
        let mut bytes = Vec::new();
        GridDump::from_grid(&MacGrid::new(layout, 1.0))
            .write_to(&mut bytes)
            .unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(GridDump::read_from(&mut bytes.as_slice()).is_err());
        bytes[0] = b'X';
        assert!(GridDump::read_from(&mut bytes.as_slice()).is_err());
    }
}
