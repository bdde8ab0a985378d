"""
Pipeline Configuration
Merges defaults, a KEY=value config file and command-line overrides into one PipelineConfig
"""
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

from dotenv import dotenv_values

from .errors import ConfigError
from .graph_builder import GraphOptions
from .influence_service import InfluenceParams
from .pdf_solver import SolverConfig
from .topic_metrics import MetricOptions
from .topic_miner import MiningOptions


PRESETS = ('full', 'no-h', 'no-gamma', 'no-weights', 'plain-graph')
DEFAULT_K_LIST = (10, 15, 20, 25, 30)


@dataclass
class PipelineConfig:
    input_path: Optional[str] = None
    input_format: Optional[str] = None
    out_dir: str = 'out'
    tokenizer: str = 'whitespace'
    stop_words_path: Optional[str] = None
    protected_terms_path: Optional[str] = None
    replacements_path: Optional[str] = None
    place_names_path: Optional[str] = None
    k_list: Optional[List[int]] = None
    preset: str = 'full'
    influence: InfluenceParams = field(default_factory=InfluenceParams)
    graph: GraphOptions = field(default_factory=GraphOptions)
    solver: SolverConfig = field(default_factory=SolverConfig)
    metrics: MetricOptions = field(default_factory=MetricOptions)
    mining: MiningOptions = field(default_factory=MiningOptions)

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ConfigError(f"Unknown preset '{self.preset}' (expected one of {', '.join(PRESETS)})")
        if self.k_list is not None:
            if not self.k_list or any(k < 1 for k in self.k_list):
                raise ConfigError("K list must hold positive integers")

    @property
    def seed(self) -> int:
        return self.solver.seed

    def sweep_k_values(self) -> List[int]:
        return list(self.k_list) if self.k_list else list(DEFAULT_K_LIST)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['metrics']['sharpness_m'] = list(self.metrics.sharpness_m)
        return data


def _to_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off', ''):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _to_int_list(value: Any) -> List[int]:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(part) for part in str(value).replace(' ', '').split(',') if part]


def _to_optional_float(value: Any) -> Optional[float]:
    if value is None or str(value).strip().lower() in ('', 'none', 'auto'):
        return None
    return float(value)


def _to_optional_str(value: Any) -> Optional[str]:
    if value is None or str(value).strip() == '':
        return None
    return str(value)


# KEY -> (section, field, cast); section None means a top-level PipelineConfig field
CONFIG_KEYS: Dict[str, Tuple[Optional[str], str, Callable[[Any], Any]]] = {
    'INPUT': (None, 'input_path', _to_optional_str),
    'FORMAT': (None, 'input_format', _to_optional_str),
    'OUT_DIR': (None, 'out_dir', str),
    'TOKENIZER': (None, 'tokenizer', str),
    'STOP_WORDS': (None, 'stop_words_path', _to_optional_str),
    'PROTECTED_TERMS': (None, 'protected_terms_path', _to_optional_str),
    'REPLACEMENTS': (None, 'replacements_path', _to_optional_str),
    'PLACE_NAMES': (None, 'place_names_path', _to_optional_str),
    'K_LIST': (None, 'k_list', _to_int_list),
    'PRESET': (None, 'preset', str),
    'EPS_F': ('influence', 'eps_f', float),
    'TAU0': ('influence', 'tau0', float),
    'DECAY_G': ('influence', 'decay_g', float),
    'HN_SHIFT': ('influence', 'hn_shift', float),
    'SALIENCE': ('graph', 'salience', str),
    'SALIENCE_CAP': ('graph', 'cap', float),
    'BOOST': ('graph', 'boost_path', _to_optional_str),
    'BOOST_FACTOR': ('graph', 'boost_factor', float),
    'USE_WEIGHTS': ('graph', 'use_weights', _to_bool),
    'FALLBACK_UNIFORM': ('graph', 'fallback_uniform', _to_bool),
    'K': ('solver', 'K', int),
    'LAMBDA_H': ('solver', 'lambda_h', _to_optional_float),
    'GAMMA': ('solver', 'gamma', float),
    'RHO': ('solver', 'rho', float),
    'EPS': ('solver', 'eps', float),
    'MAX_OUTER': ('solver', 'max_outer', int),
    'MAX_ADMM': ('solver', 'max_admm', int),
    'MAX_INNER': ('solver', 'max_inner', int),
    'TOL': ('solver', 'tol', float),
    'DECORRELATION_STEP': ('solver', 'decorrelation_step', float),
    'SEED': ('solver', 'seed', int),
    'RESTARTS': ('solver', 'restarts', int),
    'NO_H': ('solver', 'freeze_h', _to_bool),
    'COLD_ADMM': ('solver', 'cold_admm', _to_bool),
    'M': ('metrics', 'm', int),
    'REFERENCE': ('metrics', 'reference', str),
    'MISSING_WORDS': ('metrics', 'missing_words', str),
    'WINDOW': ('metrics', 'window', int),
    'TD_FLOOR': ('metrics', 'td_floor', float),
    'SHARPNESS_ON': ('metrics', 'sharpness_on', str),
    'SHARPNESS_M': ('metrics', 'sharpness_m', _to_int_list),
    'N_TOP_POSTS': ('mining', 'n_top_posts', int),
    'N_KEYWORDS': ('mining', 'n_keywords', int),
    'WEIGHTED_ACTIVITY': ('mining', 'weighted_activity', _to_bool),
    'DISPLAY_M': ('mining', 'display_m', int),
}


def read_config_file(path: str) -> Dict[str, str]:
    """Read a flat KEY=value file (dotenv syntax, # comments allowed)"""
    if not os.path.exists(path):
        raise ConfigError(f"Config file not found: {path}")
    values = dotenv_values(path)
    unknown = sorted(k for k in values if k.upper() not in CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"Unknown config key(s) in {path}: {', '.join(unknown)}")
    return {k.upper(): v for k, v in values.items() if v is not None}


def apply_overrides(config: PipelineConfig, overrides: Dict[str, Any]) -> PipelineConfig:
    """
    Apply KEY -> value overrides, casting each value to its field type

    Args:
        config: Base configuration
        overrides: Mapping of CONFIG_KEYS names to raw or typed values

    Returns:
        New, validated PipelineConfig
    """
    top_level: Dict[str, Any] = {}
    sections: Dict[str, Dict[str, Any]] = {}
    for key, raw in overrides.items():
        key = key.upper()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"Unknown config key '{key}'")
        section, name, cast = CONFIG_KEYS[key]
        try:
            value = cast(raw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Config key {key}: invalid value {raw!r} ({e})")
        if section is None:
            top_level[name] = value
        else:
            sections.setdefault(section, {})[name] = value

    updated = {name: replace(getattr(config, name), **values) for name, values in sections.items()}
    return replace(config, **top_level, **updated)


def apply_preset(config: PipelineConfig, preset: str) -> PipelineConfig:
    """Ablation switches: freeze H, drop the decorrelator, drop influence weights, or drop weights and salience"""
    if preset not in PRESETS:
        raise ConfigError(f"Unknown preset '{preset}' (expected one of {', '.join(PRESETS)})")
    solver, graph = config.solver, config.graph
    if preset == 'no-h':
        solver = replace(solver, freeze_h=True)
    elif preset == 'no-gamma':
        solver = replace(solver, gamma=0.0)
    elif preset == 'no-weights':
        graph = replace(graph, use_weights=False)
    elif preset == 'plain-graph':
        graph = replace(graph, use_weights=False, salience='unit', boost_path=None)
    return replace(config, preset=preset, solver=solver, graph=graph)


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> PipelineConfig:
    """
    Build the pipeline configuration

    Precedence: dataclass defaults < config file < overrides; the preset is applied last.

    Args:
        path: Optional KEY=value config file
        overrides: Values from command-line flags, keyed like the config file

    Returns:
        Validated PipelineConfig
    """
    config = PipelineConfig()
    if path:
        config = apply_overrides(config, read_config_file(path))
    if overrides:
        config = apply_overrides(config, overrides)
    return apply_preset(config, config.preset)

