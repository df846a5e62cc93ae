"""Discovery of measurement models, after Scrapy's spider loader.

The loader walks every module listed in the ``MODEL_MODULES`` setting and
registers the ``MeasurementModel`` subclasses that define a ``name``.
"""

import inspect
import logging
from types import ModuleType
from typing import Dict, Iterator, List, Optional, Type

from scrapy.settings import BaseSettings, Settings
from scrapy.utils.misc import walk_modules

from bellsim.models.base import MeasurementModel

logger = logging.getLogger(__name__)

DEFAULT_MODEL_MODULES: List[str] = ["bellsim.models"]


def iter_model_classes(module: ModuleType) -> Iterator[Type[MeasurementModel]]:
    """Yield the named model classes defined in ``module`` itself."""
    for obj in vars(module).values():
        if (
            inspect.isclass(obj)
            and issubclass(obj, MeasurementModel)
            and obj.__module__ == module.__name__
            and not inspect.isabstract(obj)
            and getattr(obj, "name", "")
        ):
            yield obj


class ModelLoader:
    """Registry of model classes keyed by name.

    Args:
        settings: Settings providing ``MODEL_MODULES``.
    """

    def __init__(self, settings: BaseSettings) -> None:
        self.model_modules: List[str] = settings.getlist("MODEL_MODULES", DEFAULT_MODEL_MODULES)
        self._models: Dict[str, Type[MeasurementModel]] = {}
        self._load_all_models()

    @classmethod
    def from_settings(cls, settings: Optional[BaseSettings] = None) -> "ModelLoader":
        return cls(settings if settings is not None else Settings())

    def _load_all_models(self) -> None:
        for name in self.model_modules:
            for module in walk_modules(name):
                for model_cls in iter_model_classes(module):
                    if model_cls.name in self._models and self._models[model_cls.name] is not model_cls:
                        logger.warning(
                            f"Model name '{model_cls.name}' defined by both "
                            f"{self._models[model_cls.name].__module__} and {model_cls.__module__}"
                        )
                    self._models[model_cls.name] = model_cls

    def load(self, name: str) -> Type[MeasurementModel]:
        """Return the model class registered under ``name``.

        Raises:
            KeyError: If no model has that name.
        """
        try:
            return self._models[name]
        except KeyError:
            raise KeyError(f"Model not found: {name}") from None

    def list(self) -> List[str]:
        return sorted(self._models)


def load_model(name: str, settings: Optional[BaseSettings] = None) -> MeasurementModel:
    """Instantiate the model registered under ``name``."""
    return ModelLoader.from_settings(settings).load(name)()
