"""Finite order theory, sieve semantics, Vietoris locales, sheafification and incidence algebras."""

from .errors import HistoposError
from .gaussian import Gaussian
from .order import (
    BooleanSubalgebra,
    CoarseGrainingPoset,
    FinitePoset,
    OrthoLattice,
    boolean_lattice,
    build_ortholattice,
    build_poset,
    builtin_lattice,
    enumerate_boolean_subalgebras,
    is_distributive,
    mo_lattice,
)
from .histories import DecoherenceFunctional, semantic_value, trapped, trapped_family
from .sieves import PosetPresheaf, Sieve, global_sections, heyting_of_sieves, local_sections, omega_presheaf, sieves_at
from .vietoris import FiniteTopology, Frame, ch_locale, frame_automorphisms, frame_ops, generate_topology
from .sheaves import EtaleSheaf, Germ, TopPresheaf, check_collation, etale_space, sections, sheafify, stalk_at
from .qauset import IncidenceAlgebra, differential, grade, incidence_algebra, zeta_mobius

__version__ = "0.1.0"
