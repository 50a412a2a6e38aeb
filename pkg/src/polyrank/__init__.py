"""Partition rank, Schmidt rank, bias and point counting for multilinear and homogeneous forms."""
from .fields import (QQ, ZZ, CapExceeded, ExtensionField, FieldElement, PrimeField, char_value,
                     enumerate_field, finite_field)
from .forms import (FormCollection, HomogeneousForm, LinearMapTuple, MultilinearForm, compose,
                    diagonal_collection, diagonal_form, polarize, random_form, random_homogeneous, reduce_mod_p)
from .rank import PartitionRankCertificate, prk_exact_d2, prk_upper_search, verify_certificate
from .bias import bias_exact
from .geometry import singular_locus_count

__version__ = "0.1.0"
