"""Electromagnetic material model and per-interaction coefficients.

All coefficients use perpendicular (TE) polarization. Every function in this
module accepts either a scalar ``cos_incidence`` or a numpy array of them and
returns a matching complex scalar or array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0
VACUUM_PERMITTIVITY = 8.8541878128e-12


class MaterialError(ValueError):
    pass


@dataclass(frozen=True)
class Material:
    """Lossy dielectric slab, or a perfect electric conductor.

    When ``is_pec`` is set the dielectric fields are carried along but ignored
    by every operation.
    """

    id: str
    rel_permittivity: float = 1.0
    conductivity: float = 0.0
    thickness: float = 0.1
    is_pec: bool = False

    def __post_init__(self):
        if not np.isfinite([self.rel_permittivity, self.conductivity, self.thickness]).all():
            raise MaterialError(f"material {self.id!r}: non-finite parameter")
        if self.rel_permittivity < 1.0:
            raise MaterialError(f"material {self.id!r}: rel_permittivity must be >= 1")
        if self.conductivity < 0.0:
            raise MaterialError(f"material {self.id!r}: conductivity must be >= 0")
        if self.thickness <= 0.0:
            raise MaterialError(f"material {self.id!r}: thickness must be > 0")


# Conventional building-material constants; the reference floor plan does not
# publish the values used for its walls and furniture.
DEFAULT_MATERIALS = {
    "brick": Material("brick", 4.44, 0.001, 0.23),
    "wood": Material("wood", 5.0, 0.01, 0.04),
    "metal": Material("metal", is_pec=True),
    "concrete": Material("concrete", 5.31, 0.066, 0.3),
}


def complex_permittivity(material: Material, frequency: float) -> complex:
    """Relative complex permittivity ``er - j*sigma/(2*pi*f*e0)``."""
    if material.is_pec:
        raise MaterialError(f"material {material.id!r} is a perfect conductor")
    if frequency <= 0:
        raise MaterialError("frequency must be positive")
    loss = material.conductivity / (2.0 * np.pi * frequency * VACUUM_PERMITTIVITY)
    return complex(material.rel_permittivity, -loss)


def _normal_wavenumber_ratio(eta, cos_i):
    # sqrt(eta - sin^2) on the principal branch; Im <= 0 for passive media.
    # Written as (eta - 1) + cos^2 so that eta = 1 gives exactly cos_i.
    cos_i = np.asarray(cos_i, dtype=float)
    return np.sqrt((eta - 1.0) + cos_i**2 + 0j)


def fresnel_reflection(material: Material, cos_incidence, frequency: float):
    """Perpendicular-polarization reflection coefficient, air to half-space."""
    cos_i = np.asarray(cos_incidence, dtype=float)
    if material.is_pec:
        out = np.full(cos_i.shape, -1.0 + 0j)
        return out if out.ndim else complex(out)
    eta = complex_permittivity(material, frequency)
    q = _normal_wavenumber_ratio(eta, cos_i)
    out = (cos_i - q) / (cos_i + q)
    return out if np.ndim(out) else complex(out)


def interface_transmission(material: Material, cos_incidence, frequency: float, into: bool = True):
    """Perpendicular-polarization transmission coefficient across one interface.

    ``into=True`` is air to material, ``into=False`` is material back to air
    along the same refracted ray.
    """
    cos_i = np.asarray(cos_incidence, dtype=float)
    if material.is_pec:
        out = np.zeros(cos_i.shape, dtype=complex)
        return out if out.ndim else complex(out)
    eta = complex_permittivity(material, frequency)
    q = _normal_wavenumber_ratio(eta, cos_i)
    out = 2.0 * cos_i / (cos_i + q) if into else 2.0 * q / (q + cos_i)
    return out if np.ndim(out) else complex(out)


def transmitted_power_fraction(material: Material, cos_incidence, frequency: float):
    """Fraction of incident power carried across the air/material interface."""
    cos_i = np.asarray(cos_incidence, dtype=float)
    if material.is_pec:
        out = np.zeros(cos_i.shape)
        return out if out.ndim else float(out)
    eta = complex_permittivity(material, frequency)
    q = _normal_wavenumber_ratio(eta, cos_i)
    t = 2.0 * cos_i / (cos_i + q)
    out = np.abs(t) ** 2 * q.real / cos_i
    return out if np.ndim(out) else float(out)


def attenuation_constant(material: Material, frequency: float) -> float:
    """Field attenuation constant inside the material, Np/m."""
    n = np.sqrt(complex_permittivity(material, frequency))
    return float(-2.0 * np.pi * frequency / SPEED_OF_LIGHT * n.imag)


def slab_transmission(material: Material, cos_incidence, frequency: float):
    """Single-pass amplitude transmission through a slab of the material.

    Product of the entry and exit interface coefficients and the field decay
    ``exp(-alpha * L)`` over the in-slab length at the refracted angle.
    Internal multiple reflections are ignored.
    """
    cos_i = np.asarray(cos_incidence, dtype=float)
    if material.is_pec:
        out = np.zeros(cos_i.shape, dtype=complex)
        return out if out.ndim else complex(out)
    eta = complex_permittivity(material, frequency)
    n_real = np.sqrt(eta).real
    sin_t = np.sqrt(1.0 - cos_i**2) / n_real
    cos_t = np.sqrt(1.0 - sin_t**2)
    path_in_slab = material.thickness / cos_t
    decay = np.exp(-attenuation_constant(material, frequency) * path_in_slab)
    out = (
        interface_transmission(material, cos_i, frequency, into=True)
        * interface_transmission(material, cos_i, frequency, into=False)
        * decay
    )
    return out if np.ndim(out) else complex(out)
