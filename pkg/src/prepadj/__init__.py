"""prepadj: preparedness-adjusted disparity estimation and sensitivity bands."""

__version__ = "0.1.0"
