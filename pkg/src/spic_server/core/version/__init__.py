import logging

from .tools import register_tools
from .version import VERSION
from ...consts import consts

logger = logging.getLogger(consts.LOGGER_NAME)


def load(*_):
    logger.debug(f"{consts.SERVER_NAME} {VERSION}")
    register_tools()


__all__ = ["load", "VERSION"]
