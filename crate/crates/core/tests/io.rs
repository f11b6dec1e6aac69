use t3lab::io::{vtk_text_len, write_energy_csv, write_scaling_csv, write_vtk, SCALING_HEADER};
use t3lab::laminate::{optimize_scaling, ScalingOptions};
use t3lab::{energy::total_energy, Grid3, PhaseField, WellSystem};
use vtkio::model::{Attribute, DataSet, Piece};

#[test]
fn vtk_round_trips_through_an_independent_reader() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fields.vtk");
    let g = Grid3::unit(2);
    let a: Vec<f64> = (0..g.len()).map(|p| p as f64).collect();
    let b = vec![0.25; g.len()];
    write_vtk(&path, &g, "round trip", &[("first", &a), ("second", &b)]).unwrap();
    let size = std::fs::metadata(&path).unwrap().len() as usize;
    assert_eq!(size, vtk_text_len(&g, "round trip", &["first", "second"]) + g.len() * 2 * 4);

    let vtk = vtkio::Vtk::import(&path).unwrap();
    let DataSet::ImageData { extent, pieces, .. } = vtk.data else {
        panic!("expected structured points");
    };
    let dims = match extent {
        vtkio::model::Extent::Dims(d) => d,
        other => panic!("unexpected extent {other:?}"),
    };
    assert_eq!(dims, [2, 2, 2]);
    let Piece::Inline(piece) = &pieces[0] else {
        panic!("expected inline data");
    };
    let arrays: Vec<(String, Vec<f32>)> = piece
        .data
        .point
        .iter()
        .map(|attr| match attr {
            Attribute::DataArray(d) => (d.name.clone(), d.data.clone().cast_into::<f32>().unwrap()),
            other => panic!("unexpected attribute {other:?}"),
        })
        .collect();
    assert_eq!(arrays[0].0, "first");
    assert_eq!(arrays[1].0, "second");
    // x index fastest in the file
    for (file_pos, v) in arrays[0].1.iter().enumerate() {
        let (x, y, z) = (file_pos % 2, (file_pos / 2) % 2, file_pos / 4);
        assert_eq!(*v as f64, a[g.idx(x, y, z)]);
    }
    assert!(arrays[1].1.iter().all(|v| *v == 0.25));
}

#[test]
fn csv_outputs_have_headers_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let ws = WellSystem::reference();
    let rows = optimize_scaling(&ws, &ws.aux[0], &[1e-2, 1e-4], &ScalingOptions::default()).unwrap();
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    write_scaling_csv(&p1, &rows).unwrap();
    write_scaling_csv(&p2, &rows).unwrap();
    let text = std::fs::read_to_string(&p1).unwrap();
    assert_eq!(text.lines().next().unwrap(), SCALING_HEADER.join(","));
    assert_eq!(text.lines().count(), 3);
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());

    let g = Grid3::unit(4);
    let chi = PhaseField::constant(g, [1.0, 0.0, 0.0]).unwrap();
    let rep = total_energy(&chi, &ws, &ws.aux[0], 1e-2).unwrap();
    let p3 = dir.path().join("e.csv");
    write_energy_csv(&p3, &[rep]).unwrap();
    let mut rdr = csv::Reader::from_path(&p3).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let rec = rdr.records().next().unwrap().unwrap();
    let col = |name: &str| rec[headers.iter().position(|h| h == name).unwrap()].parse::<f64>().unwrap();
    assert_eq!(col("N"), 4.0);
    assert!((col("E_el") - 8e-4).abs() < 1e-15);
    assert_eq!(col("eps"), 1e-2);
}
