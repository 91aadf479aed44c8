from affembed.cli import main

main()
