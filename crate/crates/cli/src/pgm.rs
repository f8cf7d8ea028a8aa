//! 8-bit binary PGM heatmaps of signed spectra.

/// `frames × bins` values, row-major by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub frames: usize,
    pub bins: usize,
    pub values: Vec<f64>,
}

impl Plane {
    pub fn get(&self, frame: usize, bin: usize) -> f64 {
        self.values[frame * self.bins + bin]
    }
}

/// Gray level of `v` when `±scale` map to black and white; zero is mid-gray.
pub fn gray_level(v: f64, scale: f64) -> u8 {
    if !(scale > 0.0) {
        return 128;
    }
    (127.5 + 127.5 * v / scale).round().clamp(0.0, 255.0) as u8
}

/// P5 image with one row per bin (bin 0 on top) and one column per frame.
///
/// Values are scaled by the largest magnitude in the plane so that the sign
/// of every coefficient stays visible around mid-gray.
pub fn encode(plane: &Plane) -> Vec<u8> {
    let scale = plane.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = format!("P5\n{} {}\n255\n", plane.frames, plane.bins).into_bytes();
    out.reserve(plane.frames * plane.bins);
    for bin in 0..plane.bins {
        for frame in 0..plane.frames {
            out.push(gray_level(plane.get(frame, bin), scale));
        }
    }
    out
}
