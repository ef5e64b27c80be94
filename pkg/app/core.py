from typing import Callable, Dict, FrozenSet

# флаги, заданные в командной строке явно: они важнее значений из файла экземпляра
explicit_flags: FrozenSet[str] = frozenset()

# реестр команд CLI: имя -> обработчик
commands: Dict[str, Callable] = {}


def command(name: str):
    """Регистрирует обработчик команды (аналог декоратора роутера)."""

    def wrap(fn: Callable) -> Callable:
        if name in commands:
            raise RuntimeError(f"command {name!r} registered twice")
        commands[name] = fn
        return fn

    return wrap
