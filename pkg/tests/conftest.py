import math

# Reduced configurations that run in seconds; physics checks that need the
# full defaults live in test_acceptance.py.
SMALL = {
    "two_body": dict(n_points=64, spacing=0.25, t_final=0.5, dt=0.01, compare_every=10),
    "c60_double_slit": dict(n_points=2048, n_ensemble=400, n_trajectories=4, chi2_bins=10),
    "stern_gerlach": dict(n_fine=2**17, gradient=100.0, sigma0=2e-5, envelope_stride=64,
                          n_ensemble=400, n_trajectories=4, flight_snapshots=100),
    "epr_b": dict(sigma0=1.0, gradient=6.0, t_b=1.0, t_final=4.0, n_points=192, half_width=24.0,
                  n_ensemble=300, n_trajectories=2, sweep_b=[0.0, math.pi / 4]),
    "asym_interference": dict(n_points=2**14, slit_a_center=-20e-6, slit_a_width=10e-6,
                              grid_b_center=20e-6, grid_b_count=50, n_ensemble=500),
}

# (number, name, passed, detail) appended by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {num:>2}  {name}: {detail}")
