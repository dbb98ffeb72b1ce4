"""
Model Registry - Track Trained Fusion Networks
==============================================
JSON index of every TFNN1 model written by the toolkit:
- kind (fbp-boost, pwls-boost, pwc) and layer sizes
- training metrics and creation time
- status (active, deprecated)
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import pandas as pd

from src.config import settings
from src.core.exceptions import InputDataError
from src.models.neural.model_io import load_model
from src.models.neural.network import NeuralNet

logger = logging.getLogger(__name__)

MODEL_KINDS = ("fbp-boost", "pwls-boost", "pwc", "custom")
REGISTRY_FILE = "model_registry.json"


class ModelRegistry:
    """Central registry of trained networks, persisted as JSON"""

    def __init__(self, registry_path: Optional[Union[str, Path]] = None):
        self.registry_path = Path(registry_path or settings.MODEL_REGISTRY_PATH or REGISTRY_FILE)
        self.registry: Dict[str, Dict[str, Any]] = self.load_registry()
        logger.debug(f"ModelRegistry initialized. Path: {self.registry_path}")

    def load_registry(self) -> Dict[str, Dict[str, Any]]:
        if self.registry_path.exists():
            try:
                with open(self.registry_path, 'r') as f:
                    registry = json.load(f)
                logger.debug(f"Loaded registry with {len(registry)} models")
                return registry
            except Exception as e:
                logger.error(f"Error loading registry: {e}")
                return {}
        return {}

    def register_model(self,
                       model_name: str,
                       kind: str,
                       model_path: Union[str, Path],
                       layer_sizes: List[int],
                       metrics: Optional[Dict[str, float]] = None,
                       config: Optional[Dict[str, Any]] = None,
                       description: str = '') -> None:
        """
        Record a trained network.

        Args:
            model_name: Unique identifier
            kind: One of MODEL_KINDS
            model_path: TFNN1 file location
            layer_sizes: Network layer sizes
            metrics: Training metrics (final/validation loss, epochs, ...)
            config: Fusion/training configuration used
        """
        if kind not in MODEL_KINDS:
            raise InputDataError(f"Unknown model kind '{kind}'; expected one of {MODEL_KINDS}")
        try:
            self.registry[model_name] = {
                'name': model_name,
                'kind': kind,
                'path': str(model_path),
                'layer_sizes': [int(n) for n in layer_sizes],
                'metrics': dict(metrics or {}),
                'config': dict(config or {}),
                'created_at': datetime.now().isoformat(),
                'description': description,
                'status': 'active'
            }
            self.save_registry()
            logger.info(f"Registered model: {model_name} ({kind})")
        except Exception as e:
            logger.error(f"Error registering model: {e}")
            raise

    def save_registry(self) -> None:
        try:
            self.registry_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.registry_path, 'w') as f:
                json.dump(self.registry, f, indent=2, sort_keys=True)
        except Exception as e:
            logger.error(f"Error saving registry: {e}")
            raise

    def get_model_info(self, model_name: str) -> Optional[Dict[str, Any]]:
        return self.registry.get(model_name)

    def list_models(self, kind: Optional[str] = None, status: str = 'active') -> Dict[str, Dict[str, Any]]:
        result = {}
        for name, info in self.registry.items():
            if status and info.get('status') != status:
                continue
            if kind and info.get('kind') != kind:
                continue
            result[name] = info
        return result

    def deprecate(self, model_name: str) -> None:
        if model_name not in self.registry:
            raise KeyError(f"Model not found: {model_name}")
        self.registry[model_name]['status'] = 'deprecated'
        self.save_registry()

    def get_best_model(self, kind: str, metric: str = 'val_loss') -> Tuple[Optional[str], Optional[Dict[str, Any]]]:
        """Lowest value of `metric` among active models of `kind`"""
        models = {n: i for n, i in self.list_models(kind=kind).items() if metric in i['metrics']}
        if not models:
            logger.warning(f"No {kind} models with metric '{metric}'")
            return None, None
        return min(models.items(), key=lambda item: item[1]['metrics'][metric])

    def get_model(self, model_name: str) -> NeuralNet:
        info = self.get_model_info(model_name)
        if not info:
            raise KeyError(f"Model not found: {model_name}")
        return load_model(info['path'])

    def to_dataframe(self) -> pd.DataFrame:
        rows = []
        for name, info in self.registry.items():
            row = {'name': name, 'kind': info['kind'], 'status': info['status'],
                   'layers': "-".join(str(n) for n in info['layer_sizes']),
                   'created_at': info['created_at'], 'path': info['path']}
            row.update(info.get('metrics', {}))
            rows.append(row)
        return pd.DataFrame(rows)

    def get_summary(self) -> Dict[str, Any]:
        return {
            'total_models': len(self.registry),
            'active_models': len(self.list_models()),
            'kinds': sorted({info['kind'] for info in self.registry.values()}),
        }
