###############################################################################
#                                                                             #
#    This program is free software: you can redistribute it and/or modify     #
#    it under the terms of the GNU General Public License as published by     #
#    the Free Software Foundation, either version 3 of the License, or        #
#    (at your option) any later version.                                      #
#                                                                             #
#    This program is distributed in the hope that it will be useful,          #
#    but WITHOUT ANY WARRANTY; without even the implied warranty of           #
#    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the            #
#    GNU General Public License for more details.                             #
#                                                                             #
#    You should have received a copy of the GNU General Public License        #
#    along with this program. If not, see <http://www.gnu.org/licenses/>.     #
#                                                                             #
###############################################################################

"""
Full-size runs: conservation at n=32, Maxwellian stationarity, the eps transient, the
memory-to-Landau convergence study and the kernel suite. Set SCILANDAU_SLOW=1 to run them.
"""

import json
import os
import shutil
import tempfile
import unittest
from dataclasses import replace

import numpy as np
import pandas as pd

from scilandau import harness
from scilandau.diagnostics import boundary_layer
from scilandau.grid_fields import build_grid, certified_window, maxwellian
from scilandau.harness import (EXIT_OK, MIN_CONVERGENCE_ORDER, MIN_ERROR_RATIO, MIN_STATIONARITY_ORDER,
                               SimulationConfig, initial_datum, parse_config)
from scilandau.kernels import CutoffSpec
from scilandau.landau_solver import LandauConfig, run_landau
from scilandau.memory_solver import MemoryConfig, MemorySolver, planned_lag_evaluations

SLOW = bool(os.environ.get('SCILANDAU_SLOW'))


@unittest.skipUnless(SLOW, 'set SCILANDAU_SLOW to run the acceptance suite')
class TestAcceptance(unittest.TestCase):

    def setUp(self):
        self.tmp_dir = tempfile.mkdtemp(prefix='scilandau_tmp_')

    def tearDown(self):
        shutil.rmtree(self.tmp_dir)

    def test_kernel_check(self):
        config = parse_config('{}', 'kernel-check')
        assert harness.run(config, self.tmp_dir) == EXIT_OK
        table = pd.read_csv(os.path.join(self.tmp_dir, 'kernel_check.csv'))
        assert len(table) == 20 + 15 + 5 + 3 + 10
        assert table['rel_error'].max() <= 1e-6

    def test_landau_conservation(self):
        grid = build_grid(32, 8.0)
        u0 = initial_datum(SimulationConfig('landau'), grid)
        trajectory = run_landau(LandauConfig(t_end=0.5), u0)
        frame = trajectory.moments_frame()
        mass = frame['mass'].values
        assert np.max(np.abs(mass - mass[0])) <= 1e-12 * mass[0]
        for column in ('p1', 'energy'):
            values = frame[column].values
            assert np.max(np.abs(values - values[0])) <= 1e-6 * abs(values[0])
        assert np.all(np.diff(frame['entropy'].values) <= 1e-10)

    def test_maxwellian_stationarity(self):
        grid = build_grid(32, 8.0)
        m = maxwellian(grid)
        trajectory = run_landau(LandauConfig(t_end=0.5), m)
        assert max(np.max(np.abs(state.values - m.values)) for state in trajectory.states) <= 1e-6
        eps = 0.1
        for t in (0.1 * eps, eps, 10 * eps):
            assert boundary_layer(t, m, eps, CutoffSpec())[0].sup_norm() <= 1e-10

    def test_eps_transient(self):
        document = {'grid': {'n': 24, 'L': 8.0}, 't_end': 0.5, 'eps_list': [0.05, 0.025, 0.0125]}
        config = parse_config(json.dumps(document), 'stationarity')
        assert harness.run(config, self.tmp_dir) == EXIT_OK
        table = pd.read_csv(os.path.join(self.tmp_dir, 'stationarity.csv'))
        memory = table[table['solver'] == 'memory']
        assert np.all(np.diff(memory['residual'].values) < 0)
        assert memory['fitted_order'].iloc[0] >= MIN_STATIONARITY_ORDER

    def test_convergence(self):
        document = {'grid': {'n': 24, 'L': 8.0}, 't_end': 0.5, 'eps_list': [0.05, 0.025, 0.0125]}
        config = parse_config(json.dumps(document), 'converge')
        assert harness.run(config, self.tmp_dir) == EXIT_OK
        table = pd.read_csv(os.path.join(self.tmp_dir, 'convergence.csv'))
        errors = table['error'].values
        assert np.all(errors[1:] * MIN_ERROR_RATIO <= errors[:-1])
        assert table['fitted_order'].iloc[0] >= MIN_CONVERGENCE_ORDER

    def test_windowed_history(self):
        grid = build_grid(16, 8.0)
        u0 = initial_datum(SimulationConfig('memory'), grid)
        config = MemoryConfig(n=16, L=8.0, eps=0.005, dt=0.001, t_end=0.5, tail_tol=1e-6)
        windowed = MemorySolver(config)
        naive = MemorySolver(replace(config, mode='naive'))
        a, b = windowed.run(u0), naive.run(u0)
        assert windowed.table.window < windowed.n_steps
        deviation = max(np.max(np.abs(x.values - y.values)) for x, y in zip(a.states, b.states))
        assert deviation <= 10 * config.tail_tol
        for solver, trajectory in ((windowed, a), (naive, b)):
            assert solver.lag_evaluations == trajectory.manifest['planned_lag_evaluations']
        # eps=0.002, dt=5e-4, t_end=1: the stored window must cut lag work at least threefold.
        n_steps = 2000
        window = certified_window(0.5e-3 / 0.002, CutoffSpec(), config.tail_tol)
        assert window < n_steps
        ratio = planned_lag_evaluations(n_steps, n_steps) / planned_lag_evaluations(n_steps, window)
        assert ratio >= 3
