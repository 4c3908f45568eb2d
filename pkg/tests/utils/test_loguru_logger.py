from loguru import logger

from priorlab.utils import initialize_logger


def test_log_file_created(tmp_path):
    """Messages reach priorlab.log under the given folder."""
    initialize_logger(tmp_path / "logs", "DEBUG")
    logger.info("hello from the test")
    logger.complete()
    text = (tmp_path / "logs" / "priorlab.log").read_text()
    assert "hello from the test" in text


def test_repeat_calls_keep_one_file_sink(tmp_path):
    folder = tmp_path / "logs"
    initialize_logger(folder)
    initialize_logger(folder)
    logger.warning("once")
    logger.complete()
    text = (folder / "priorlab.log").read_text()
    assert text.count("once") == 1
