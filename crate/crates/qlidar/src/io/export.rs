//! CSV and PGM exports. Outputs are byte-deterministic for fixed inputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::model::IntensityImage;
use crate::ranging::ProfileSeries;

/// Binary PGM (P5, maxval 255) with min-max scaling; a constant image maps
/// to all zeros so exports stay deterministic.
pub fn export_pgm_f64(
    width: usize,
    height: usize,
    values: &[f64],
    path: &Path,
) -> std::io::Result<()> {
    assert_eq!(values.len(), width * height, "value buffer must match dimensions");
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{width} {height}\n255\n")?;
    let payload: Vec<u8> = values
        .iter()
        .map(|&v| {
            if range > 0.0 {
                ((v - min) / range * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect();
    out.write_all(&payload)?;
    out.flush()
}

pub fn export_pgm_intensity(image: &IntensityImage, path: &Path) -> std::io::Result<()> {
    let values: Vec<f64> = image.data().iter().map(|&v| f64::from(v)).collect();
    export_pgm_f64(image.width(), image.height(), &values, path)
}

/// Profile series as CSV with the canonical header row.
pub fn export_csv(series: &ProfileSeries, path: &Path) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "gate_time_ps,mean_intensity,corr_peak,corr_snr")?;
    for i in 0..series.len() {
        writeln!(
            out,
            "{},{},{},{}",
            series.gate_times_ps[i],
            series.mean_intensity[i],
            series.corr_peak[i],
            series.corr_snr[i]
        )?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_min_max_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        export_pgm_f64(2, 2, &[0.0, 1.0, 2.0, 3.0], &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0u8, 85, 170, 255]);
    }

    #[test]
    fn constant_image_maps_to_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("flat.pgm");
        export_pgm_f64(2, 2, &[7.0; 4], &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[bytes.len() - 4..], &[0u8; 4]);
    }

    #[test]
    fn empty_series_gives_header_only_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let series = ProfileSeries {
            gate_times_ps: vec![],
            mean_intensity: vec![],
            corr_peak: vec![],
            corr_snr: vec![],
        };
        export_csv(&series, &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "gate_time_ps,mean_intensity,corr_peak,corr_snr\n"
        );
    }

    #[test]
    fn csv_rows_match_series() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        let series = ProfileSeries {
            gate_times_ps: vec![0, 90],
            mean_intensity: vec![0.5, 0.25],
            corr_peak: vec![1.0, 2.0],
            corr_snr: vec![3.5, f64::INFINITY],
        };
        export_csv(&series, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "0,0.5,1,3.5");
        assert_eq!(lines[2], "90,0.25,2,inf");
    }
}
