from screen_bie.helpers.cli import main

if __name__ == "__main__":
    main()
