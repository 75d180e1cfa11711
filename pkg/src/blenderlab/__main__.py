from blenderlab.cli import main

main()
