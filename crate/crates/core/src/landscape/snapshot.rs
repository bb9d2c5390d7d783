use std::io::Write;
use std::path::Path;

use super::Landscape;
use crate::error::{Error, Result};
use crate::numfmt::fmt_sig;

impl Landscape {
    /// One row per cell: `x, y, land_use, management, epsilon`.
    /// Natural cells have an empty management field.
    pub fn write_snapshot<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "land_use", "management", "epsilon"])?;
        for (i, cell) in self.cells().enumerate() {
            let (x, y) = (i % self.width, i / self.width);
            w.write_record([
                x.to_string(),
                y.to_string(),
                cell.land_use.as_str().to_string(),
                cell.management.map_or("", |m| m.as_str()).to_string(),
                fmt_sig(cell.epsilon),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_snapshot(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_snapshot(std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::parse(path, format!("{other:?}")),
        })
    }
}

#[cfg(test)]
mod tests {
    use crate::landscape::{Cell, LandUse, Landscape, Management};

    #[test]
    fn snapshot_rows() {
        let base = Cell {
            land_use: LandUse::Natural,
            management: None,
            epsilon: 1.95,
            theta_n: 1e-3,
            theta_c: 1e-4,
            theta_m: 2e-4,
        };
        let crop = Cell {
            land_use: LandUse::Crop,
            management: Some(Management::Organic),
            epsilon: 0.5,
            ..base
        };
        let ls = Landscape::from_cells(2, 1, &[base, crop]).unwrap();
        let mut buf = Vec::new();
        ls.write_snapshot(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "x,y,land_use,management,epsilon\n0,0,natural,,1.95\n1,0,crop,organic,0.5\n");
    }
}
