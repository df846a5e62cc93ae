"""Result processing pipelines for the bellsim project.

This module implements small, single-responsibility pipelines that every
output record passes through before it is written. The pipelines to run and
their order come from the ``RESULT_PIPELINES`` setting, exactly like
``ITEM_PIPELINES`` in a crawl.

See documentation:
https://docs.scrapy.org/en/latest/topics/item-pipeline.html
"""

import enum
import logging
import math
from typing import Any, List, Optional

import numpy as np
import scrapy
from itemadapter import ItemAdapter
from scrapy.settings import BaseSettings
from scrapy.utils.conf import build_component_list
from scrapy.utils.misc import load_object

from bellsim.exceptions import InvalidResult

logger = logging.getLogger(__name__)


class NormalisationPipeline:
    """Pipeline converting field values into plain JSON-compatible Python values.

    Numpy scalars and arrays become Python numbers and lists, tuples become
    lists, enums become their values and negative zero becomes zero. Nested
    dicts and lists are converted recursively.
    """

    def process_item(self, item: scrapy.Item, command: str) -> scrapy.Item:
        """Normalise every field of the item in place.

        Args:
            item: The record to normalise.
            command: Name of the command that produced the record.

        Returns:
            scrapy.Item: The same item with normalised values.
        """
        adapter = ItemAdapter(item)
        for field_name, field_value in list(adapter.items()):
            adapter[field_name] = self._normalise(field_value)
        return item

    def _normalise(self, value: Any) -> Any:
        if isinstance(value, dict):
            return {str(key): self._normalise(v) for key, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [self._normalise(v) for v in value]
        if isinstance(value, np.ndarray):
            return [self._normalise(v) for v in value.tolist()]
        if isinstance(value, enum.Enum):
            return value.value
        if isinstance(value, (bool, np.bool_)):
            return bool(value)
        if isinstance(value, np.integer):
            return int(value)
        if isinstance(value, (float, np.floating)):
            value = float(value)
            return 0.0 if value == 0.0 else value
        return value


class ValidationPipeline:
    """Pipeline rejecting records with missing essential fields or non-finite numbers.

    A record cannot be silently dropped from a result, so failures raise
    ``InvalidResult`` instead of ``DropItem``. Essential fields are declared
    by each item class in ``essential_fields``.
    """

    def process_item(self, item: scrapy.Item, command: str) -> scrapy.Item:
        """Validate the record.

        Args:
            item: The record to validate.
            command: Name of the command that produced the record.

        Returns:
            scrapy.Item: The validated item.

        Raises:
            InvalidResult: If an essential field is missing or empty, or a
                number anywhere in the record is NaN or infinite.
        """
        adapter = ItemAdapter(item)

        for field_name in getattr(item, "essential_fields", ()):
            field_value = adapter.get(field_name)
            if field_value is None or (isinstance(field_value, str) and not field_value.strip()):
                error_msg = f"Missing essential field '{field_name}' in {type(item).__name__} from {command}"
                logger.error(error_msg)
                raise InvalidResult(error_msg)

        for field_name, field_value in adapter.items():
            path = self._find_non_finite(field_value, field_name)
            if path is not None:
                error_msg = f"Non-finite number at '{path}' in {type(item).__name__} from {command}"
                logger.error(error_msg)
                raise InvalidResult(error_msg)

        logger.debug(f"{type(item).__name__} from {command} passed validation")
        return item

    def _find_non_finite(self, value: Any, path: str) -> Optional[str]:
        if isinstance(value, dict):
            for key, v in value.items():
                found = self._find_non_finite(v, f"{path}.{key}")
                if found is not None:
                    return found
        elif isinstance(value, (list, tuple)):
            for index, v in enumerate(value):
                found = self._find_non_finite(v, f"{path}[{index}]")
                if found is not None:
                    return found
        elif isinstance(value, (float, np.floating)) and not math.isfinite(value):
            return path
        return None


class ResultPipelineManager:
    """Runs records through the pipelines configured in ``RESULT_PIPELINES``.

    Args:
        pipelines: Pipeline instances in processing order.
    """

    def __init__(self, pipelines: List[Any]) -> None:
        self.pipelines = pipelines

    @classmethod
    def from_settings(cls, settings: BaseSettings) -> "ResultPipelineManager":
        paths = build_component_list(settings.getdict("RESULT_PIPELINES"))
        pipelines = [load_object(path)() for path in paths]
        logger.debug(f"Enabled result pipelines: {[type(p).__name__ for p in pipelines]}")
        return cls(pipelines)

    def process(self, item: scrapy.Item, command: str) -> scrapy.Item:
        for pipeline in self.pipelines:
            item = pipeline.process_item(item, command)
        return item
