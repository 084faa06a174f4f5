"""FedStyle federated learning simulator (C++ core)."""

try:
    from ._fedstyle import (  # installed wheel layout
        ConfigError,
        InputError,
        NumericError,
        ParseError,
        ProtocolError,
        ShapeError,
        __version__,
        cross_entropy,
        cs,
        default_config,
        generate_synthetic,
        load_csv,
        run_experiment,
        run_suite,
        save_csv,
    )
except ImportError:  # build-tree layout: module next to the build dir
    from _fedstyle import (
        ConfigError,
        InputError,
        NumericError,
        ParseError,
        ProtocolError,
        ShapeError,
        __version__,
        cross_entropy,
        cs,
        default_config,
        generate_synthetic,
        load_csv,
        run_experiment,
        run_suite,
        save_csv,
    )

__all__ = [
    "ConfigError",
    "InputError",
    "NumericError",
    "ParseError",
    "ProtocolError",
    "ShapeError",
    "__version__",
    "cross_entropy",
    "cs",
    "default_config",
    "generate_synthetic",
    "load_csv",
    "run_experiment",
    "run_suite",
    "save_csv",
]
