"""Energy-balancing actor-critic control of port-Hamiltonian systems.

The package has three layers:

* ``ebac.ph`` and ``ebac.fourier`` -- port-Hamiltonian models with a
  fixed-step zero-order-hold simulator, and Fourier features on a box
  domain with analytic gradients.
* ``ebac.policy`` and ``ebac.learning`` -- the parameterized
  energy-shaping / damping-injection control law with saturation-aware
  policy gradients, and the temporal-difference actor-critic that learns
  its parameters.
* ``ebac.experiments`` and ``ebac.cli`` -- the saturated pendulum
  swing-up benchmark (learning curves over replicates, policy
  evaluation, passivity-based stability diagnostics on state grids) and
  the command-line front end that exports everything to plain files.
"""

__version__ = "0.1.0"
