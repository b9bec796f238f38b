//! Raster transport, generation colouring and PPM output.

mod transport;

use std::path::Path;

use rayon::prelude::*;

use crate::basin::GenerationField;
use crate::error::Result;
use crate::grid::{write_file, CellRaster};

pub(crate) use transport::transport_cells;
pub use transport::{transport_raster, Direction};

pub type Rgb = [u8; 3];

/// Colours for the generations of a fast basin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    pub background: Rgb,
    pub attractor: Rgb,
    /// Colour of generation `k` is `generations[k - 1]`.
    pub generations: Vec<Rgb>,
    pub overflow: Rgb,
}

impl Default for Palette {
    /// Red attractor; light blue, dark blue, green and black for generations
    /// one to four; white background.
    fn default() -> Self {
        Palette {
            background: [255, 255, 255],
            attractor: [255, 0, 0],
            generations: vec![[120, 180, 255], [0, 0, 160], [0, 160, 0], [0, 0, 0]],
            overflow: [128, 128, 128],
        }
    }
}

impl Palette {
    pub fn color(&self, gen: Option<u8>) -> Rgb {
        match gen {
            None => self.background,
            Some(0) => self.attractor,
            Some(k) => self
                .generations
                .get(k as usize - 1)
                .copied()
                .unwrap_or(self.overflow),
        }
    }
}

/// An 8-bit RGB image, row-major from the top row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, fill: Rgb) -> Self {
        RgbImage {
            width,
            height,
            data: fill.repeat(width * height),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        let o = 3 * (y * self.width + x);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    pub fn put(&mut self, x: usize, y: usize, c: Rgb) {
        let o = 3 * (y * self.width + x);
        self.data[o..o + 3].copy_from_slice(&c);
    }

    /// Binary PPM (`P6`) encoding.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }
}

/// Colours each cell by its generation. Image row 0 is the top grid row.
pub fn colorize(field: &GenerationField, palette: &Palette) -> RgbImage {
    let (nx, ny) = (field.grid().nx(), field.grid().ny());
    let mut img = RgbImage::new(nx, ny, palette.background);
    img.data
        .par_chunks_mut(3 * nx)
        .enumerate()
        .for_each(|(row, px)| {
            let j = ny - 1 - row;
            for i in 0..nx {
                let c = palette.color(field.gen(i, j));
                px[3 * i..3 * i + 3].copy_from_slice(&c);
            }
        });
    img
}

/// Two-colour rendering of a raster: occupied cells in `fg`.
pub fn render_raster(raster: &CellRaster, fg: Rgb, bg: Rgb) -> RgbImage {
    let (nx, ny) = (raster.nx(), raster.ny());
    let mut img = RgbImage::new(nx, ny, bg);
    for idx in raster.occupied() {
        let (i, j) = raster.grid().coords(idx);
        img.put(i, ny - 1 - j, fg);
    }
    img
}

pub fn write_ppm(image: &RgbImage, path: &Path) -> Result<()> {
    write_file(path, &image.to_ppm())
}
