from greenkernel.cli import main

main()
