use std::fs;
use std::path::Path;

use dnagan_core::data::pgm::write_pgm;
use dnagan_core::data::{load_attr_list, load_image, save_dataset, synth_dataset, SynthSpec, ATTR_LIST_FILE};
use dnagan_core::sampler::LabelCensus;
use dnagan_core::Error;

fn write_images(dir: &Path, names: &[&str]) {
    for (k, name) in names.iter().enumerate() {
        write_pgm(&dir.join(name), &[k as f32 / 4.0; 16], 4, 4).unwrap();
    }
}

#[test]
fn celeba_style_list_maps_signs_to_bits() {
    let dir = tempfile::tempdir().unwrap();
    write_images(dir.path(), &["a.pgm", "b.pgm"]);
    let list = dir.path().join("attrs.txt");
    fs::write(&list, "2\nBangs Smiling\na.pgm 1 -1\nb.pgm  -1  1\n").unwrap();
    let ds = load_attr_list(dir.path(), &list, None, 4, 4).unwrap();
    assert_eq!(ds.attr_names(), &["Bangs".to_string(), "Smiling".to_string()]);
    assert_eq!(ds.images()[0].label, vec![true, false]);
    assert_eq!(ds.images()[1].label, vec![false, true]);
    assert_eq!(ds.census().unwrap().counts(), &[0, 1, 1, 0]);
}

#[test]
fn column_selection_follows_given_order() {
    let dir = tempfile::tempdir().unwrap();
    write_images(dir.path(), &["a.pgm"]);
    let list = dir.path().join("attrs.txt");
    fs::write(&list, "1\nX Y Z\na.pgm 1 -1 -1\n").unwrap();
    let sel = vec!["Z".to_string(), "X".to_string()];
    let ds = load_attr_list(dir.path(), &list, Some(&sel), 4, 4).unwrap();
    assert_eq!(ds.images()[0].label, vec![false, true]);
    let bad = vec!["W".to_string()];
    assert!(load_attr_list(dir.path(), &list, Some(&bad), 4, 4).is_err());
}

fn parse_line(err: Error) -> usize {
    match err {
        Error::Parse { line, .. } => line,
        other => panic!("expected a parse error, got {other}"),
    }
}

#[test]
fn short_file_fails_at_eof() {
    let dir = tempfile::tempdir().unwrap();
    write_images(dir.path(), &["a.pgm", "b.pgm"]);
    let list = dir.path().join("attrs.txt");
    fs::write(&list, "3\nA\na.pgm 1\nb.pgm -1\n").unwrap();
    let err = load_attr_list(dir.path(), &list, None, 4, 4).unwrap_err();
    assert_eq!(parse_line(err), 5);
}

#[test]
fn malformed_rows_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    write_images(dir.path(), &["a.pgm", "b.pgm"]);
    let list = dir.path().join("attrs.txt");
    fs::write(&list, "2\nA B\na.pgm 1 -1\nb.pgm 1 0\n").unwrap();
    assert_eq!(parse_line(load_attr_list(dir.path(), &list, None, 4, 4).unwrap_err()), 4);
    fs::write(&list, "2\nA B\na.pgm 1\nb.pgm 1 1\n").unwrap();
    assert_eq!(parse_line(load_attr_list(dir.path(), &list, None, 4, 4).unwrap_err()), 3);
    fs::write(&list, "1\nA B\nmissing.pgm 1 1\n").unwrap();
    assert_eq!(parse_line(load_attr_list(dir.path(), &list, None, 4, 4).unwrap_err()), 3);
    fs::write(&list, "1\nA B\na.pgm 1 1\nb.pgm 1 1\n").unwrap();
    assert_eq!(parse_line(load_attr_list(dir.path(), &list, None, 4, 4).unwrap_err()), 4);
}

#[test]
fn saved_dataset_reloads_exactly() {
    let census = LabelCensus::uniform(2, 3).unwrap();
    let ds = synth_dataset(&SynthSpec::new(census, 0.02, 4)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&ds, dir.path()).unwrap();
    let header = fs::read_to_string(dir.path().join(ATTR_LIST_FILE)).unwrap();
    assert!(header.starts_with("12\nBar Disc\n"));
    let back = load_attr_list(dir.path(), &dir.path().join(ATTR_LIST_FILE), None, 16, 16).unwrap();
    assert_eq!(back.len(), 12);
    for (a, b) in ds.images().iter().zip(back.images()) {
        assert_eq!(a.label, b.label);
        for (x, y) in a.pixels.iter().zip(&b.pixels) {
            assert!((x - y).abs() <= 0.5 / 255.0 + 1e-6);
        }
    }
    // a second save of the quantized data is byte-identical
    let again = tempfile::tempdir().unwrap();
    save_dataset(&back, again.path()).unwrap();
    let first = fs::read(dir.path().join("synth_00005.pgm")).unwrap();
    let second = fs::read(again.path().join("synth_00005.pgm")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn png_input_is_resized() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.png");
    image::GrayImage::from_pixel(8, 8, image::Luma([255u8])).save(&path).unwrap();
    let px = load_image(&path, 4, 4).unwrap();
    assert_eq!(px.len(), 16);
    assert!(px.iter().all(|&v| (v - 1.0).abs() < 1e-6));
}
