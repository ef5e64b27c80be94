import asyncio
import sys

from app.cli import run


async def main() -> int:
    # разбор флагов, конфиг из ENV и вызов команды живут в app/cli.py
    return await run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
