"""Numerical verification of the classification of real hypersurfaces with constant principal curvatures in CH^2."""
