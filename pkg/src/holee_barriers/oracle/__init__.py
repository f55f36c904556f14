"""Independent price checks: finite differences and folded-path Monte Carlo."""
from .montecarlo import McConfig, McResult, mc_price, triangle_wave
from .pde import PdeGrid, pde_price, pde_price_robin
