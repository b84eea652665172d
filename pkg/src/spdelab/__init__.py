"""spdelab: anisotropic semigroup kernels, Besov regularity estimation,
constructive reconstruction, and the renormalized 2D parabolic Anderson
model with variable diffusion coefficient."""

__version__ = "0.1.0"
