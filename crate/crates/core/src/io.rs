//! Raster file I/O. Accepts 8-bit grayscale and 24-bit RGB in PNG or binary
//! PGM/PPM; anything else is rejected with the decoded color type named.

use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader, RgbImage};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::raster::{ColorImage, SaliencyMap};

fn decode(path: &Path) -> Result<DynamicImage> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let reader = ImageReader::open(path)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?
        .with_guessed_format()
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Pnm) => {}
        Some(other) => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("{other:?} files are not supported; use PNG or PGM/PPM"),
            })
        }
        None => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: "unrecognized file signature".into(),
            })
        }
    }
    reader.decode().map_err(|source| match source {
        image::ImageError::Unsupported(e) => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: e.to_string(),
        },
        source => Error::Image {
            path: path.to_path_buf(),
            source,
        },
    })
}

/// Loads an 8-bit grayscale raster as a saliency map.
pub fn read_saliency(path: &Path) -> Result<SaliencyMap> {
    match decode(path)? {
        DynamicImage::ImageLuma8(img) => {
            let (w, h) = img.dimensions();
            SaliencyMap::new(w, h, img.into_raw())
        }
        other => Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("saliency maps must be 8-bit grayscale, found {:?}", other.color()),
        }),
    }
}

/// Loads a 24-bit RGB raster; 8-bit grayscale is expanded to RGB.
pub fn read_color(path: &Path) -> Result<ColorImage> {
    let rgb = match decode(path)? {
        DynamicImage::ImageRgb8(img) => img,
        img @ DynamicImage::ImageLuma8(_) => img.to_rgb8(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("expected 24-bit RGB or 8-bit grayscale, found {:?}", other.color()),
            })
        }
    };
    let (w, h) = rgb.dimensions();
    let pixels = rgb.pixels().map(|p| p.0).collect();
    ColorImage::new(w, h, pixels)
}

fn save(img: DynamicImage, path: &Path) -> Result<()> {
    img.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes an RGB image; the format follows the extension (`.png`, `.ppm`).
pub fn write_color(image: &ColorImage, path: &Path) -> Result<()> {
    let raw: Vec<u8> = image.pixels().iter().flatten().copied().collect();
    let buf = RgbImage::from_raw(image.width(), image.height(), raw).expect("buffer size");
    save(DynamicImage::ImageRgb8(buf), path)
}

/// Writes a saliency map as 8-bit grayscale (`.png` or `.pgm`).
pub fn write_saliency(map: &SaliencyMap, path: &Path) -> Result<()> {
    let buf = image::GrayImage::from_raw(map.width(), map.height(), map.values().to_vec()).expect("buffer size");
    save(DynamicImage::ImageLuma8(buf), path)
}

/// Copy of `image` with a `thickness`-pixel outline drawn for every box.
pub fn draw_boxes(image: &ColorImage, boxes: &[BoundingBox], color: [u8; 3], thickness: u32) -> ColorImage {
    let mut out = image.clone();
    let (w, h) = (image.width(), image.height());
    for b in boxes {
        for t in 0..thickness {
            // shrink inward so the outline never leaves the box
            if b.x1() + t > b.x2().saturating_sub(t) || b.y1() + t > b.y2().saturating_sub(t) {
                break;
            }
            let (x1, y1) = (b.x1() + t, b.y1() + t);
            let (x2, y2) = ((b.x2() - t).min(w - 1), (b.y2() - t).min(h - 1));
            for x in x1..=x2 {
                out.set_pixel(x, y1, color);
                out.set_pixel(x, y2, color);
            }
            for y in y1..=y2 {
                out.set_pixel(x1, y, color);
                out.set_pixel(x2, y, color);
            }
        }
    }
    out
}
