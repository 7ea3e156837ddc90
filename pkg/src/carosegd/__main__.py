from .gateway.cli import main_entry

main_entry()
