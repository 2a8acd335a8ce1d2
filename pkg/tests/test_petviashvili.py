import numpy as np
import pytest

from wbsolitary import spectral as sp
from wbsolitary.errors import WBError
from wbsolitary.longwave import exponents, ground_state, scale_lw
from wbsolitary.petviashvili import aligned_distance, wb_at_speed, wb_oracle
from wbsolitary.spectral import MultiplierOperator, PeriodicGrid

from conftest import solve_bdw


def test_speed_must_exceed_m0(bdw):
    g = PeriodicGrid(100.0, 256)
    with pytest.raises(WBError):
        wb_at_speed(MultiplierOperator(bdw, g), 0.9, np.zeros(256))


@pytest.mark.slow
@pytest.mark.parametrize("q", [1e-2, 1e-3, 1e-4])
def test_oracle_agrees_with_minimizer(bdw, q):
    F, res = solve_bdw(q)
    gs = ground_state(bdw)
    e = exponents(1, 2)
    seed = scale_lw(gs.profile, q, e, res.grid, edge_tol=np.inf).samples
    pv = wb_oracle(F.operator, q, 1 + gs.nu * q ** e.a, seed)
    assert 0.5 * sp.inner(res.grid, pv.field.samples, pv.field.samples) == pytest.approx(q, rel=1e-12)
    dist, _ = aligned_distance(res.w, pv.field)
    assert dist / sp.sobolev_norm(res.w, 1) <= 1e-6
    assert pv.speed == pytest.approx(res.lam, rel=1e-8)
