"""smlrt: a surrogate-model runtime.

Parses tensor-functor/map/ml directives, bridges application memory to
dense tensors (and back), dispatches annotated regions between accurate
execution with data capture and MLP surrogate inference, and persists
training records in a portable on-disk database.
"""

from . import errors
from .bridge import (
    ArrayBuffer,
    MemoryView,
    Tensor,
    compose_tensor,
    concretize_to,
    extract_symbolic_shape,
    resolve_symbolic_shape,
    scatter_from,
    wrap_tensors,
)
from .directives import (
    ConcreteSlice,
    FunctorDecl,
    MapDirective,
    MapTarget,
    MlDirective,
    SliceDim,
    SymbolicSlice,
    SymExpr,
    parse_directive,
    parse_directive_file,
    parse_functor_decl,
    parse_ml_clause,
    parse_tensor_map,
    pretty_print,
)
from .models import Model, infer, jacobi_model, load_model, save_model
from .runtime import (
    BoundMap,
    RegionDescriptor,
    RegionOutcome,
    RegionStats,
    Runtime,
    interleave_predicate,
)
from .srdb import SrdbDatabase, SrdbManifest, SrdbRecord, open_db

__version__ = "0.1.0"

__all__ = [
    "errors",
    "ArrayBuffer",
    "MemoryView",
    "Tensor",
    "extract_symbolic_shape",
    "resolve_symbolic_shape",
    "wrap_tensors",
    "compose_tensor",
    "concretize_to",
    "scatter_from",
    "SymExpr",
    "SliceDim",
    "SymbolicSlice",
    "FunctorDecl",
    "ConcreteSlice",
    "MapTarget",
    "MapDirective",
    "MlDirective",
    "parse_functor_decl",
    "parse_tensor_map",
    "parse_ml_clause",
    "parse_directive",
    "parse_directive_file",
    "pretty_print",
    "Model",
    "load_model",
    "save_model",
    "infer",
    "jacobi_model",
    "BoundMap",
    "RegionDescriptor",
    "RegionOutcome",
    "RegionStats",
    "Runtime",
    "interleave_predicate",
    "SrdbDatabase",
    "SrdbManifest",
    "SrdbRecord",
    "open_db",
    "__version__",
]
