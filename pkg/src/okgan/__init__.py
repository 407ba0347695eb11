"""GAN training with a budgeted online kernel classifier as the discriminator.

Submodules are imported explicitly (``okgan.gan``, ``okgan.metrics``, ...); this
package root stays import-light so the CLI can configure BLAS threading before
numpy loads.
"""

__version__ = "0.1.0"
