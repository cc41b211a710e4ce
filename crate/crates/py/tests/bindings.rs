use std::ffi::CString;
use std::sync::Once;

use hallfem::hallfem as hallfem_module;
use pyo3::prelude::*;

static INIT: Once = Once::new();

fn python(src: &str) -> PyResult<()> {
    INIT.call_once(|| {
        pyo3::append_to_inittab!(hallfem_module);
        Python::initialize();
    });
    let code = CString::new(src).unwrap();
    Python::attach(|py| py.run(&code, None, None))
}

#[test]
fn mesh_counts() {
    python(
        "import hallfem\n\
         m = hallfem.Mesh(1, 3)\n\
         assert (m.n_vertices, m.n_edges, m.n_faces, m.n_cells) == (8, 19, 18, 6)\n\
         assert m.euler_characteristic() == 1\n\
         assert len(m.cells()[0]) == 4\n",
    )
    .unwrap();
}

#[test]
fn simulation_dissipates_energy() {
    python(
        "import hallfem\n\
         s = hallfem.Simulation('orszag-tang', n=3, tau=0.05, t_final=0.1)\n\
         e0 = s.diagnostics().energy\n\
         rows = s.run()\n\
         assert s.n_steps == 2 and len(rows) == 2\n\
         assert rows[-1].energy <= e0\n\
         assert max(abs(d) for d in s.div_b()) < 1e-10\n\
         assert len(s.field('b')) > 0\n",
    )
    .unwrap();
}

#[test]
fn bad_arguments_raise() {
    python(
        r#"
import hallfem
for bad in [lambda: hallfem.Mesh(0, 2), lambda: hallfem.Mesh(2, 4),
            lambda: hallfem.observed_rates([1.0], [])]:
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("accepted")
"#,
    )
    .unwrap();
}

#[test]
fn check_battery_passes() {
    python(
        "import hallfem\n\
         results = hallfem.check()\n\
         assert results and all(ok for _, ok, _ in results), results\n",
    )
    .unwrap();
}
