from gasketforge.cli import main

main()
