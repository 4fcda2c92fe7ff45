import os
import sys
import logging
import importlib
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

# Add project root to sys.path to ensure 'src' package is found
root_path = Path(__file__).resolve().parent.parent
if str(root_path) not in sys.path:
    sys.path.append(str(root_path))

import typer

from logging.handlers import RotatingFileHandler

logger = logging.getLogger(__name__)

APP_NAME = "LANet"

EXTENSIONS = [
    'src.commands.build',
    'src.commands.query',
    'src.commands.export',
    'src.commands.evaluate',
]


def configure_logging(level: str):
    # stdout carries command results, so every log line goes to stderr
    handlers = [logging.StreamHandler(sys.stderr)]

    log_dir = os.getenv('LANET_LOG_DIR', os.path.join(root_path, 'logs'))
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        handlers.append(
            RotatingFileHandler(
                os.path.join(log_dir, 'lanet.log'),
                maxBytes=5*1024*1024,
                backupCount=5,
                encoding='utf-8'
            )
        )

    logging.basicConfig(
        level=level.upper(),
        format='[%(asctime)s] [%(levelname)-8s] %(name)s: %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        handlers=handlers,
        force=True
    )


def create_app() -> typer.Typer:
    app = typer.Typer(
        name=APP_NAME.lower(),
        help="LANet: ロケーション別アクティビティネットワークの構築・検索・評価",
        add_completion=False,
        no_args_is_help=True,
    )

    @app.callback()
    def main_callback(
        ctx: typer.Context,
        log_level: str = typer.Option(os.getenv('LANET_LOG_LEVEL', 'INFO'), "--log-level", help="ログレベル (DEBUG, INFO, WARNING, ERROR)"),
        seed: int = typer.Option(0, "--seed", help="予約済み (パイプラインは決定的です)"),
    ):
        if log_level.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            raise typer.BadParameter(f"unknown log level '{log_level}'", param_hint="--log-level")
        configure_logging(log_level)
        ctx.obj = {'log_level': log_level.upper(), 'seed': seed}
        logger.debug(f"{APP_NAME} started (log level {log_level.upper()}, seed {seed})")

    # Load command modules
    for extension in EXTENSIONS:
        importlib.import_module(extension).setup(app)

    return app


def main():
    app = create_app()
    app()


if __name__ == '__main__':
    main()
