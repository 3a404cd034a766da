use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use image::imageops::FilterType;
use image::{ImageBuffer, Luma};

use crate::data::pgm::{read_pgm, write_pgm};
use crate::data::{AttrDataset, LabeledImage};
use crate::error::{Error, Result};

pub const ATTR_LIST_FILE: &str = "list_attr.txt";

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Loads a single grayscale image, resampling to `height × width` when needed.
///
/// Graymaps are decoded natively; anything else goes through the `image` crate.
pub fn load_image(path: &Path, height: usize, width: usize) -> Result<Vec<f32>> {
    let is_pnm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("pnm"));
    let (h, w, pixels) = if is_pnm {
        let g = read_pgm(path)?;
        (g.height, g.width, g.pixels)
    } else {
        let img = image::open(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        let luma = img.to_luma32f();
        (
            luma.height() as usize,
            luma.width() as usize,
            luma.into_raw(),
        )
    };
    if (h, w) == (height, width) {
        return Ok(pixels);
    }
    let buf: ImageBuffer<Luma<f32>, Vec<f32>> = ImageBuffer::from_raw(w as u32, h as u32, pixels)
        .ok_or_else(|| Error::Image {
            path: path.to_path_buf(),
            msg: "raster size mismatch".into(),
        })?;
    let resized = image::imageops::resize(&buf, width as u32, height as u32, FilterType::Triangle);
    Ok(resized.into_raw().into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// Parsed attribute list without image data.
#[derive(Clone, Debug, PartialEq)]
pub struct AttrList {
    /// Selected attribute names, in selection order.
    pub names: Vec<String>,
    /// `(line number, file name, selected label bits)` per image.
    pub rows: Vec<(usize, String, Vec<bool>)>,
}

/// Parses a CelebA-style attribute list.
///
/// Line 1 holds the image count, line 2 the attribute names, then one row per
/// image: a file name followed by `1` or `-1` per attribute. `select` restricts
/// and reorders the attribute columns by name.
pub fn read_attr_list(attr_file: &Path, select: Option<&[String]>) -> Result<AttrList> {
    let file = fs::File::open(attr_file).map_err(|e| Error::io(attr_file, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let mut next_line = |what: &str| -> Result<(usize, String)> {
        loop {
            match lines.next() {
                Some((k, Ok(l))) if !l.trim().is_empty() => return Ok((k + 1, l)),
                Some((_, Ok(_))) => continue,
                Some((_, Err(e))) => return Err(Error::io(attr_file, e)),
                None => return Err(parse_err(attr_file, 0, format!("unexpected end of file, expected {what}"))),
            }
        }
    };

    let (line_no, count_line) = next_line("image count")?;
    let count: usize = count_line
        .trim()
        .parse()
        .map_err(|_| parse_err(attr_file, line_no, format!("bad image count `{}`", count_line.trim())))?;
    let (line_no, names_line) = next_line("attribute names")?;
    let all_names: Vec<String> = names_line.split_whitespace().map(String::from).collect();
    if all_names.is_empty() {
        return Err(parse_err(attr_file, line_no, "no attribute names"));
    }
    let columns: Vec<usize> = match select {
        None => (0..all_names.len()).collect(),
        Some(sel) => sel
            .iter()
            .map(|name| {
                all_names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| parse_err(attr_file, line_no, format!("no attribute named `{name}`")))
            })
            .collect::<Result<_>>()?,
    };
    if columns.is_empty() {
        return Err(Error::Config("empty attribute selection".into()));
    }
    let names: Vec<String> = columns.iter().map(|&c| all_names[c].clone()).collect();

    let mut rows = Vec::with_capacity(count);
    let mut last_line = line_no;
    for k in 0..count {
        let (line_no, row) = next_line(&format!("row {} of {count}", k + 1)).map_err(|e| match e {
            Error::Parse { path, msg, .. } => Error::Parse {
                path,
                line: last_line + 1,
                msg,
            },
            other => other,
        })?;
        last_line = line_no;
        let mut fields = row.split_whitespace();
        let file_name = fields.next().expect("non-empty line");
        let values: Vec<bool> = fields
            .map(|f| match f {
                "1" | "+1" => Ok(true),
                "-1" => Ok(false),
                other => Err(parse_err(attr_file, line_no, format!("attribute value `{other}` is not 1 or -1"))),
            })
            .collect::<Result<_>>()?;
        if values.len() != all_names.len() {
            return Err(parse_err(
                attr_file,
                line_no,
                format!("{} attribute values, header names {}", values.len(), all_names.len()),
            ));
        }
        rows.push((line_no, file_name.to_string(), columns.iter().map(|&c| values[c]).collect()));
    }
    if let Ok((line_no, _)) = next_line("") {
        return Err(parse_err(attr_file, line_no, format!("more rows than the declared {count}")));
    }
    Ok(AttrList { names, rows })
}

/// Reads an attribute list and loads the images it names from `image_dir`.
pub fn load_attr_list(
    image_dir: &Path,
    attr_file: &Path,
    select: Option<&[String]>,
    height: usize,
    width: usize,
) -> Result<AttrDataset> {
    let list = read_attr_list(attr_file, select)?;
    let mut images = Vec::with_capacity(list.rows.len());
    for (line_no, file_name, label) in list.rows {
        let path: PathBuf = image_dir.join(&file_name);
        if !path.is_file() {
            return Err(parse_err(attr_file, line_no, format!("image `{}` not found", path.display())));
        }
        images.push(LabeledImage {
            pixels: load_image(&path, height, width)?,
            name: file_name,
            label,
        });
    }
    AttrDataset::new(list.names, 1, height, width, images)
}

/// Writes every image as a graymap plus an attribute list into `dir`.
pub fn save_dataset(ds: &AttrDataset, dir: &Path) -> Result<()> {
    let (c, h, w) = ds.image_shape();
    if c != 1 {
        return Err(Error::dim(format!("graymaps hold one channel, dataset has {c}")));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut list = format!("{}\n{}\n", ds.len(), ds.attr_names().join(" "));
    for img in ds.images() {
        let name = Path::new(&img.name).with_extension("pgm");
        write_pgm(&dir.join(&name), &img.pixels, h, w)?;
        list.push_str(&name.to_string_lossy());
        for &b in &img.label {
            list.push_str(if b { " 1" } else { " -1" });
        }
        list.push('\n');
    }
    let path = dir.join(ATTR_LIST_FILE);
    fs::write(&path, list).map_err(|e| Error::io(path, e))
}
