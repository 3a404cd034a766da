//! Tiling equally sized grayscale images with a one-pixel gutter.

pub const GUTTER: usize = 1;
pub const GUTTER_VALUE: f32 = 0.5;

/// Row-major `rows × cols` tiling; returns `(height, width, pixels)`.
pub fn tile(images: &[&[f32]], rows: usize, cols: usize, h: usize, w: usize) -> (usize, usize, Vec<f32>) {
    assert_eq!(images.len(), rows * cols, "tile count");
    let height = rows * h + (rows - 1) * GUTTER;
    let width = cols * w + (cols - 1) * GUTTER;
    let mut out = vec![GUTTER_VALUE; height * width];
    for (k, img) in images.iter().enumerate() {
        let (r, c) = (k / cols, k % cols);
        let (y0, x0) = (r * (h + GUTTER), c * (w + GUTTER));
        for y in 0..h {
            out[(y0 + y) * width + x0..(y0 + y) * width + x0 + w].copy_from_slice(&img[y * w..(y + 1) * w]);
        }
    }
    (height, width, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_geometry() {
        let a = vec![0.0; 16 * 16];
        let imgs: Vec<&[f32]> = (0..6).map(|_| a.as_slice()).collect();
        let (h, w, px) = tile(&imgs, 1, 6, 16, 16);
        assert_eq!((h, w), (16, 6 * 16 + 5));
        assert_eq!(px[16], GUTTER_VALUE);
        assert_eq!(px[17], 0.0);
    }

    #[test]
    fn grid_places_tiles_row_major() {
        let tiles: Vec<Vec<f32>> = (0..4).map(|k| vec![k as f32 / 4.0; 4]).collect();
        let refs: Vec<&[f32]> = tiles.iter().map(Vec::as_slice).collect();
        let (h, w, px) = tile(&refs, 2, 2, 2, 2);
        assert_eq!((h, w), (5, 5));
        assert_eq!(px[0], 0.0);
        assert_eq!(px[3], 0.25);
        assert_eq!(px[3 * 5], 0.5);
        assert_eq!(px[4 * 5 + 4], 0.75);
    }
}
