def register_commands():
    # импорт модулей достаточно, чтобы декораторы @command отработали
    from . import compute  # noqa: F401
    from . import verify  # noqa: F401
